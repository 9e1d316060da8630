#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "experiments.hpp"
#include "qrec/diffscan.hpp"
#include "qrec/errors.hpp"
#include "qrec/expsum.hpp"
#include "qrec/linalg.hpp"
#include "qrec/orbits.hpp"
#include "qrec/poly.hpp"

namespace py = pybind11;
using namespace qrec;

namespace {

// Big integers cross the boundary as Python ints via their decimal text.
Int to_int(const py::handle& h) { return Int(py::str(h).cast<std::string>()); }

py::object from_int(const Int& v) { return py::module_::import("builtins").attr("int")(v.get_str()); }

py::object from_ext(const ExtInt& v) { return v.is_infinite() ? py::none() : from_int(v.value()); }

std::vector<Int> to_vec(const py::sequence& s) {
  std::vector<Int> out;
  for (auto h : s) out.push_back(to_int(h));
  return out;
}

py::list from_vec(const std::vector<Int>& v) {
  py::list out;
  for (const auto& x : v) out.append(from_int(x));
  return out;
}

IntMat to_mat(const py::sequence& rows) {
  std::vector<std::vector<Int>> r;
  for (auto row : rows) r.push_back(to_vec(row.cast<py::sequence>()));
  return stack_rows(r);
}

py::list from_mat(const IntMat& m) {
  py::list out;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    py::list row;
    for (std::size_t j = 0; j < m.cols(); ++j) row.append(from_int(m(i, j)));
    out.append(row);
  }
  return out;
}

PolyVec to_poly(const py::sequence& comps) {
  std::vector<std::vector<Int>> c;
  for (auto comp : comps) c.push_back(to_vec(comp.cast<py::sequence>()));
  return PolyVec::from_monomial(c);
}

py::dict cert_dict(const FleeingCertificate& c) {
  py::dict d;
  d["word_length"] = c.word_length;
  d["index"] = from_ext(c.index);
  d["full_rank"] = c.full_rank;
  d["invariant_factors"] = from_vec(c.invariant_factors);
  return d;
}

std::string run_json(const std::string& experiment, const std::string& params_json) {
  cli::ExperimentConfig config = cli::find_experiment(experiment).config();
  const cli::json params = cli::json::parse(params_json);
  for (const auto& [k, v] : params.items()) config.set_json(k, v);
  std::ostringstream out;
  cli::emit(cli::run(config), cli::Format::Json, out);
  return out.str();
}

}  // namespace

PYBIND11_MODULE(_qrec, m) {
  m.doc() = "Exact recurrence and orbit toolkit";

  py::register_exception<VerificationError>(m, "VerificationError");
  py::register_exception<CapExceeded>(m, "CapExceeded");
  py::register_exception<cli::UsageError>(m, "UsageError", PyExc_ValueError);

  m.def("invariant_factors", [](const py::sequence& a) { return from_vec(invariant_factors(to_mat(a))); });
  m.def("hnf", [](const py::sequence& a) { return from_mat(hnf(to_mat(a))); });
  m.def("rational_rank", [](const py::sequence& a) { return rational_rank(to_mat(a)); });
  m.def("determinant", [](const py::sequence& a) { return from_int(determinant(to_mat(a))); });

  m.def("mult_complexity", [](const py::sequence& p) { return from_ext(mult_complexity(to_poly(p))); },
        "Multiplicative complexity of a polynomial vector given as monomial coefficient lists; None when infinite.");
  m.def("hyperplane_fleeing", [](const py::sequence& p) { return hyperplane_fleeing(to_poly(p)); });

  m.def("poly_sum_magnitude",
        [](const py::sequence& coeffs, std::uint64_t q) { return to_double(poly_sum_magnitude(to_vec(coeffs), q)); });
  m.def(
      "qbound",
      [](unsigned degree, unsigned dim, const py::handle& complexity, double eps, double hua_constant) {
        QBoundOptions opt;
        opt.hua_constant = hua_constant;
        const QBound b = qbound(degree, dim, to_int(complexity), eps, opt);
        return py::make_tuple(b.q0, from_int(b.q));
      },
      py::arg("degree"), py::arg("dim"), py::arg("complexity"), py::arg("eps"), py::arg("hua_constant") = 10.0);

  m.def("gamma0_identity", [](std::size_t d, const std::vector<py::sequence>& samples) {
    std::vector<std::vector<Int>> s;
    for (const auto& x : samples) s.push_back(to_vec(x));
    return from_mat(gamma0_identity(d, s));
  });
  m.def("certify_companion", [](std::size_t d, unsigned depth) {
    const auto c = certify_companion_bounds(d, depth);
    py::dict out = cert_dict(c.span.certificate);
    out["stable_depth"] = c.span.stable_depth;
    return out;
  });
  m.def("fleeing_certificate", [](const std::vector<py::sequence>& points, std::size_t rank) {
    std::vector<std::vector<Int>> p;
    for (const auto& x : points) p.push_back(to_vec(x));
    return cert_dict(fleeing_certificate(p, rank));
  });

  m.def(
      "quadform_image",
      [](const std::vector<std::int64_t>& d, const std::string& form, std::int64_t bound) {
        return quadform_image(d, parse_quadform(form), bound);
      },
      py::arg("d"), py::arg("form"), py::arg("bound"));
  m.def("golden_convergent", [](std::int64_t min_den) {
    const Rat r = golden_convergent(min_den);
    return py::make_tuple(from_int(r.get_num()), from_int(r.get_den()));
  });

  m.def("experiments", [] {
    std::vector<std::string> ids;
    for (const auto& e : cli::experiments()) ids.push_back(e.id());
    return ids;
  });
  m.def("run_json", &run_json, py::arg("experiment"), py::arg("params_json"),
        "Runs an experiment with JSON parameters and returns the JSON report.");
  m.attr("__version__") = cli::kToolkitVersion;
}
