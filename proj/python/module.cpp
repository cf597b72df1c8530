#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "linkmap/clustering.hpp"
#include "linkmap/diagnostics.hpp"
#include "linkmap/genetics_math.hpp"
#include "linkmap/ordering.hpp"
#include "linkmap/simulate.hpp"

#include <cstring>

namespace py = pybind11;
using namespace linkmap;

namespace {

PopulationType pop_arg(const py::object& o) {
  if (py::isinstance<py::str>(o)) return PopulationType::parse(o.cast<std::string>());
  return o.cast<PopulationType>();
}

// markers x genotypes, codes follow Allele
py::array_t<std::uint8_t> calls_array(const MarkerMatrix& m) {
  py::array_t<std::uint8_t> out({m.n_markers(), m.n_genotypes()});
  if (!m.calls().empty()) std::memcpy(out.mutable_data(), m.calls().data(), m.calls().size());
  return out;
}

Cross cross_from_array(py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> calls,
                       std::vector<std::string> genotypes, std::vector<std::string> markers,
                       const py::object& pop) {
  if (calls.ndim() != 2 || static_cast<std::size_t>(calls.shape(0)) != markers.size() ||
      static_cast<std::size_t>(calls.shape(1)) != genotypes.size())
    throw DataError("calls must have shape (markers, genotypes)");
  std::vector<Allele> v(static_cast<std::size_t>(calls.size()));
  const std::uint8_t* p = calls.data();
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (p[k] > 3) throw ParseError("allele codes are 0 (A), 1 (B), 2 (X) and 3 (missing)");
    v[k] = static_cast<Allele>(p[k]);
  }
  return Cross::unconstructed(MarkerMatrix(std::move(genotypes), std::move(markers), std::move(v)), pop_arg(pop));
}

py::list groups_list(const Cross& c) {
  py::list out;
  for (const auto& g : c.groups()) {
    std::vector<std::string> names;
    for (auto k : g.markers) names.push_back(c.matrix().marker_name(k));
    py::dict d;
    d["name"] = g.name;
    d["markers"] = names;
    d["positions"] = g.positions;
    out.append(d);
  }
  return out;
}

py::dict ledgers_dict(const Cross& c) {
  py::dict out;
  for (const auto& [kind, ledger] : c.ledgers()) {
    py::list rows;
    for (const auto& e : ledger.entries) {
      py::dict r;
      r["marker"] = c.matrix().marker_name(e.marker);
      r["stat"] = e.stat;
      r["anchor"] = e.anchor ? py::cast(c.matrix().marker_name(*e.anchor)) : py::none();
      rows.append(r);
    }
    out[py::str(std::string(ledger_key(kind)))] = rows;
  }
  return out;
}

std::vector<std::string> names_of(const MarkerMatrix& m, const std::vector<std::size_t>& idx) {
  std::vector<std::string> out;
  for (auto k : idx) out.push_back(m.marker_name(k));
  return out;
}

PushParams push_params(const py::object& seg_thresh, std::optional<std::string> seg_ratio, double miss_thresh,
                       double max_rf, double min_lod) {
  PushParams p;
  if (py::isinstance<py::str>(seg_thresh))
    p.seg_thresh = parse_seg_thresh(seg_thresh.cast<std::string>());
  else
    p.seg_thresh = seg_thresh.cast<double>();
  p.seg_ratio = std::move(seg_ratio);
  p.miss_thresh = miss_thresh;
  p.max_rf = max_rf;
  p.min_lod = min_lod;
  return p;
}

}  // namespace

PYBIND11_MODULE(_linkmap, m) {
  m.doc() = "Genetic linkage map construction";

  auto base = py::register_exception<Error>(m, "LinkmapError", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<PopulationType>(m, "PopulationType")
      .def(py::init([](const std::string& name) { return PopulationType::parse(name); }), py::arg("name"))
      .def_property_readonly("name", &PopulationType::name)
      .def_property_readonly("selfing_generations", [](const PopulationType& p) { return p.selfing_generations; })
      .def_property_readonly("expected_het_proportion", &PopulationType::expected_het_proportion)
      .def("__eq__", [](const PopulationType& a, const PopulationType& b) { return a == b; })
      .def("__repr__", [](const PopulationType& p) { return "PopulationType('" + p.name() + "')"; });

  py::class_<Cross>(m, "Cross")
      .def_static("from_calls", &cross_from_array, py::arg("calls"), py::arg("genotypes"), py::arg("markers"),
                  py::arg("pop") = "DH")
      .def_static(
          "load", [](const std::filesystem::path& p, const py::object& pop) { return load_cross(p, pop_arg(pop)); },
          py::arg("path"), py::arg("pop") = "DH")
      .def("save", [](const Cross& c, const std::filesystem::path& p) { write_cross(c, p); }, py::arg("path"))
      .def_property_readonly("pop", &Cross::pop)
      .def_property_readonly("n_genotypes", &Cross::n_genotypes)
      .def_property_readonly("n_markers", [](const Cross& c) { return c.matrix().n_markers(); })
      .def_property_readonly("n_mapped", &Cross::n_mapped_markers)
      .def_property_readonly("genotypes", [](const Cross& c) { return c.matrix().genotype_names(); })
      .def_property_readonly("markers", [](const Cross& c) { return c.matrix().marker_names(); })
      .def_property_readonly("calls", [](const Cross& c) { return calls_array(c.matrix()); })
      .def_property_readonly("groups", &groups_list)
      .def_property_readonly("ledgers", &ledgers_dict)
      .def_property_readonly("group_lengths", &Cross::group_lengths)
      .def("equivalent", [](const Cross& a, const Cross& b, double tol) { return equivalent(a, b, tol); },
           py::arg("other"), py::arg("tol") = 1e-3)
      .def("__repr__", [](const Cross& c) {
        return "<Cross " + c.pop().name() + " " + std::to_string(c.n_genotypes()) + " genotypes, " +
               std::to_string(c.matrix().n_markers()) + " markers, " + std::to_string(c.groups().size()) +
               " groups>";
      });

  // genetics math
  m.def("hoeffding_delta", &hoeffding_delta, py::arg("n"), py::arg("epsilon"));
  m.def(
      "threshold_cm",
      [](std::size_t n, double eps, const std::string& f) { return threshold_cm(n, eps, parse_map_function(f)); },
      py::arg("n"), py::arg("epsilon"), py::arg("dist_fun") = "kosambi");
  m.def(
      "threshold_profile",
      [](const std::vector<std::size_t>& ns, const std::vector<double>& cms, const std::string& f) {
        std::vector<std::tuple<std::size_t, double, double>> out;
        for (const auto& r : threshold_profile(ns, cms, parse_map_function(f)))
          out.emplace_back(r.n, r.cm_target, r.neg_log10_epsilon);
        return out;
      },
      py::arg("n"), py::arg("cm"), py::arg("dist_fun") = "kosambi");
  m.def(
      "map_forward", [](double p, const std::string& f) { return map_forward(p, parse_map_function(f)); },
      py::arg("p"), py::arg("dist_fun") = "kosambi");
  m.def(
      "map_inverse", [](double cm, const std::string& f) { return map_inverse(cm, parse_map_function(f)); },
      py::arg("cm"), py::arg("dist_fun") = "kosambi");
  m.def("ril_expected_mismatch", &ril_expected_mismatch, py::arg("rho"), py::arg("r"));
  m.def(
      "ril_invert", [](double obs, const py::object& pop) { return ril_invert(obs, pop_arg(pop)); },
      py::arg("observed"), py::arg("pop"));

  m.def(
      "cluster",
      [](const Cross& c, double epsilon) {
        std::vector<std::vector<std::string>> out;
        for (const auto& comp : cluster_markers(c.matrix(), c.pop(), epsilon))
          out.push_back(names_of(c.matrix(), comp));
        return out;
      },
      py::arg("cross"), py::arg("epsilon"));

  m.def(
      "construct",
      [](const Cross& c, double p_value, const std::string& objective, const std::string& dist_fun,
         double miss_thresh, bool detect_bad_data, bool mvest_bc, double no_map_dist, std::size_t no_map_size,
         bool anchor, bool bychr, std::vector<std::string> chr, unsigned threads) {
        ConstructParams p;
        p.p_value = p_value;
        p.order.objective = parse_objective(objective);
        p.order.map_function = parse_map_function(dist_fun);
        p.order.detect_bad_data = detect_bad_data;
        p.order.no_map_dist = no_map_dist;
        p.order.no_map_size = no_map_size;
        p.order.anchor = anchor;
        p.miss_thresh = miss_thresh;
        p.mvest_bc = mvest_bc;
        p.bychr = bychr;
        p.chr = std::move(chr);
        p.threads = threads;
        py::gil_scoped_release release;
        return construct_map(c, p);
      },
      py::arg("cross"), py::arg("p_value") = 1e-6, py::arg("objective") = "COUNT", py::arg("dist_fun") = "kosambi",
      py::arg("miss_thresh") = 1.0, py::arg("detect_bad_data") = false, py::arg("mvest_bc") = false,
      py::arg("no_map_dist") = 15.0, py::arg("no_map_size") = 0, py::arg("anchor") = false, py::arg("bychr") = true,
      py::arg("chr") = std::vector<std::string>{}, py::arg("threads") = 0);

  m.def(
      "simulate",
      [](std::size_t n, std::size_t chromosomes, std::size_t markers, double length, const py::object& pop,
         double missing, double error, std::uint64_t seed, bool grouped, bool shuffle) {
        SimSpec s;
        s.pop = pop_arg(pop);
        s.n = n;
        s.chromosomes = SimSpec::even(chromosomes, markers, length);
        s.missing_rate = missing;
        s.error_rate = error;
        s.seed = seed;
        s.group_by_chromosome = grouped;
        s.shuffle = shuffle;
        Simulation sim = simulate_population(s);
        py::dict truth;
        truth["chromosome"] = sim.truth.chromosome;
        truth["position"] = sim.truth.position;
        truth["crossovers"] = sim.truth.crossovers;
        return py::make_tuple(std::move(sim.cross), truth);
      },
      py::arg("n") = 100, py::arg("chromosomes") = 5, py::arg("markers") = 200, py::arg("length") = 150.0,
      py::arg("pop") = "DH", py::arg("missing") = 0.0, py::arg("error") = 0.0, py::arg("seed") = 1,
      py::arg("grouped") = false, py::arg("shuffle") = false);

  // diagnostics
  m.def(
      "profile_genotypes",
      [](const Cross& c, std::optional<double> xo_lambda) {
        const GenotypeStats s = profile_genotypes(c, xo_lambda);
        py::dict d;
        d["genotype"] = s.genotype;
        d["xo"] = s.xo;
        d["dxo"] = s.dxo;
        d["miss"] = s.miss;
        if (!s.flagged.empty()) d["flagged"] = s.flagged;
        return d;
      },
      py::arg("cross"), py::arg("xo_lambda") = py::none());
  m.def("two_point_lod", &two_point_lod, py::arg("d"), py::arg("n_obs"));
  m.def(
      "seg_distortion",
      [](const Cross& c, const std::string& marker) {
        const auto k = c.matrix().find_marker(marker);
        if (!k) throw DataError("unknown marker " + marker);
        return seg_distortion_test(c.matrix().column(*k), c.pop()).neg_log10_p;
      },
      py::arg("cross"), py::arg("marker"));
  m.def(
      "gen_clones",
      [](const Cross& c, double tol) {
        py::list out;
        for (const auto& r : gen_clones(c, tol)) {
          py::dict d;
          d["G1"] = r.g1;
          d["G2"] = r.g2;
          d["coef"] = r.coef;
          d["match"] = r.match;
          d["diff"] = r.diff;
          d["na_both"] = r.na_both;
          d["na_one"] = r.na_one;
          d["group"] = r.group;
          out.append(d);
        }
        return out;
      },
      py::arg("cross"), py::arg("tol") = 0.9);
  m.def(
      "fix_clones",
      [](const Cross& c, double tol, bool consensus) {
        const auto rows = gen_clones(c, tol);
        return fix_clones(c, rows, consensus);
      },
      py::arg("cross"), py::arg("tol") = 0.9, py::arg("consensus") = true);
  m.def(
      "pull",
      [](const Cross& c, const std::string& type, const py::object& seg_thresh, std::optional<std::string> seg_ratio,
         double miss_thresh) {
        return pull_markers(c, parse_ledger_key(type), push_params(seg_thresh, std::move(seg_ratio), miss_thresh, 0.25, 3.0));
      },
      py::arg("cross"), py::arg("type"), py::arg("seg_thresh") = 0.05, py::arg("seg_ratio") = py::none(),
      py::arg("miss_thresh") = 0.1);
  m.def(
      "push",
      [](const Cross& c, const std::string& type, const py::object& seg_thresh, std::optional<std::string> seg_ratio,
         double miss_thresh, double max_rf, double min_lod, std::optional<std::string> unlinked_group) {
        return push_markers(c, parse_push_type(type),
                            push_params(seg_thresh, std::move(seg_ratio), miss_thresh, max_rf, min_lod), unlinked_group);
      },
      py::arg("cross"), py::arg("type"), py::arg("seg_thresh") = 0.05, py::arg("seg_ratio") = py::none(),
      py::arg("miss_thresh") = 0.1, py::arg("max_rf") = 0.25, py::arg("min_lod") = 3.0,
      py::arg("unlinked_group") = py::none());
  m.def(
      "quick_est",
      [](const Cross& c, double error_prob, const std::string& f) {
        return quick_est(c, error_prob, parse_map_function(f));
      },
      py::arg("cross"), py::arg("error_prob") = 1e-4, py::arg("dist_fun") = "kosambi");

  // structure
  m.def(
      "subset",
      [](const Cross& c, std::optional<std::vector<std::string>> genotypes,
         std::optional<std::vector<std::string>> groups) {
        Cross out = genotypes ? subset_cross(c, *genotypes) : c;
        return groups ? subset_groups(out, *groups) : out;
      },
      py::arg("cross"), py::arg("genotypes") = py::none(), py::arg("groups") = py::none());
  m.def(
      "merge",
      [](const Cross& c, const std::map<std::string, std::vector<std::string>>& merges, double gap) {
        return merge_groups(c, {merges.begin(), merges.end()}, gap);
      },
      py::arg("cross"), py::arg("merges"), py::arg("gap") = 5.0);
  m.def(
      "break_groups",
      [](const Cross& c, const std::map<std::string, std::vector<std::string>>& splits) {
        return break_groups(c, {splits.begin(), splits.end()});
      },
      py::arg("cross"), py::arg("splits"));
  m.def(
      "combine", [](const std::vector<Cross>& maps, bool keep_all) { return combine_maps(maps, keep_all); },
      py::arg("maps"), py::arg("keep_all") = true);
}
