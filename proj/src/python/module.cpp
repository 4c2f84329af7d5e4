#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "reversemath/answereq.hpp"
#include "reversemath/corpus.hpp"
#include "reversemath/forge.hpp"
#include "reversemath/numext.hpp"
#include "reversemath/stats.hpp"

namespace py = pybind11;
using namespace reversemath;

namespace {

py::dict normalized_to_dict(const answereq::NormalizedAnswer& n) {
    py::dict d;
    d["raw"] = n.raw;
    if (n.is_rational()) {
        d["kind"] = "rational";
        d["numerator"] = n.value.num;
        d["denominator"] = n.value.den;
    } else {
        d["kind"] = "text";
        d["text"] = n.text;
    }
    return d;
}

py::dict candidate_to_dict(const numext::MaskCandidate& c) {
    py::dict d;
    d["begin"] = c.begin;
    d["end"] = c.end;
    d["surface"] = c.surface;
    d["value"] = answereq::to_string(c.value);
    d["kind"] = c.kind == numext::MaskCandidate::Kind::digits ? "digits" : "words";
    d["language"] = c.language;
    return d;
}

numext::MaskCandidate candidate_from_dict(const py::dict& d) {
    numext::MaskCandidate c;
    c.begin = d["begin"].cast<size_t>();
    c.end = d["end"].cast<size_t>();
    c.surface = d["surface"].cast<std::string>();
    auto norm = answereq::normalize(d["value"].cast<std::string>());
    if (norm.is_rational()) c.value = norm.value;
    c.kind = d["kind"].cast<std::string>() == "words"
                 ? numext::MaskCandidate::Kind::words
                 : numext::MaskCandidate::Kind::digits;
    return c;
}

py::dict utest_to_dict(const stats::UTestResult& r) {
    py::dict d;
    d["u"] = r.u_statistic;
    d["p"] = r.p_value;
    d["method"] = r.method;
    d["n_same"] = r.n_same;
    d["n_cross"] = r.n_cross;
    d["mean_same"] = r.mean_same;
    d["mean_cross"] = r.mean_cross;
    d["degenerate"] = r.degenerate;
    return d;
}

}  // namespace

PYBIND11_MODULE(_reversemath, m) {
    m.doc() = "answer-inversion toolkit core operations";

    m.def("extract_final",
          [](const std::string& text) { return answereq::extract_final(text); },
          py::arg("text"));
    m.def("normalize",
          [](const std::string& answer) {
              return normalized_to_dict(answereq::normalize(answer));
          },
          py::arg("answer"));
    m.def("equivalent",
          [](const std::string& a, const std::string& b) {
              return answereq::equivalent(a, b);
          },
          py::arg("a"), py::arg("b"));

    m.def("extract_values",
          [](const std::string& text) {
              static const std::vector<numext::NumberLexicon> lex = {
                  numext::builtin_english_lexicon()};
              py::list out;
              for (const auto& c : numext::extract_values(text, lex))
                  out.append(candidate_to_dict(c));
              return out;
          },
          py::arg("text"));
    m.def("mask_value",
          [](const std::string& text, const py::dict& candidate,
             const std::string& mask_token) {
              return numext::mask_value(text, candidate_from_dict(candidate),
                                        mask_token);
          },
          py::arg("text"), py::arg("candidate"), py::arg("mask_token") = "[MASK]");

    m.def("build_intermediate",
          [](const std::string& question, const std::string& answer,
             const py::dict& candidate) {
              corpus::ProblemRecord p;
              p.id = "py";
              p.question = question;
              p.answer = answer;
              return forge::build_intermediate(p, candidate_from_dict(candidate),
                                               forge::ForgeConfig{});
          },
          py::arg("question"), py::arg("answer"), py::arg("candidate"));

    m.def("success_rate", &corpus::success_rate, py::arg("accepted"),
          py::arg("attempted"));

    m.def("jaccard",
          [](const std::set<std::string>& a,
             const std::set<std::string>& b) -> py::object {
              auto j = stats::jaccard(a, b);
              return j ? py::cast(*j) : py::none();
          },
          py::arg("a"), py::arg("b"));
    m.def("mann_whitney_one_sided",
          [](const std::vector<double>& same, const std::vector<double>& cross) {
              return utest_to_dict(stats::mann_whitney_one_sided(same, cross));
          },
          py::arg("same"), py::arg("cross"));
    m.def("difficulty", &stats::difficulty, py::arg("correct_by_model"));
}
