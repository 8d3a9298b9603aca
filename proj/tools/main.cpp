#include "oqmap/classical.hpp"
#include "oqmap/io.hpp"
#include "oqmap/quantum_maps.hpp"
#include "oqmap/spectral.hpp"
#include "oqmap/transport.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>

using namespace oqmap;
namespace fs = std::filesystem;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

struct MapOptions {
  std::string kind = "toy";
  std::size_t N = 0;
  int k = 0;
  int D = 3;
  int D1 = 3, D2 = 3, l1 = 0, l2 = 2;
  std::vector<int> kept{0, 2};
  std::string path = "auto";

  void add_to(CLI::App* app, const std::string& kinds) {
    app->add_option("--kind", kind, "map kind")->check(CLI::IsMember(split(kinds)));
    app->add_option("--N", N, "Hilbert space dimension (open-baker, toy)");
    app->add_option("--k", k, "number of digits, N = D^k");
    app->add_option("--D", D, "base for walsh maps");
    app->add_option("--D1", D1, "stretching factor of strip 1");
    app->add_option("--D2", D2, "stretching factor of strip 2");
    app->add_option("--l1", l1, "offset of strip 1");
    app->add_option("--l2", l2, "offset of strip 2");
    app->add_option("--kept", kept, "kept strips for walsh maps")->delimiter(',');
    app->add_option("--path", path, "walsh assembly path")->check(CLI::IsMember({"auto", "dense", "tensor"}));
  }

  static std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
  }

  AssemblyPath assembly() const {
    if (path == "dense") return AssemblyPath::dense;
    if (path == "tensor") return AssemblyPath::tensor;
    return AssemblyPath::automatic;
  }

  std::size_t dimension(int base) const {
    if (N) return N;
    if (k >= 1) return checked_pow(static_cast<std::size_t>(base), k);
    throw std::invalid_argument("either --N or --k is required");
  }

  QuantumMap build() const {
    if (kind == "open-baker") {
      BakerParams p{D1, D2, l1, l2};
      p.validate();
      if (N == 0 && D1 != D2) throw std::invalid_argument("open-baker with D1 != D2 needs --N");
      return build_open_baker(p, PlanckGrid(dimension(D1)));
    }
    if (kind == "toy") {
      const std::size_t n = dimension(3);
      if (k >= 1 && N == 0) return build_toy_baker(PlanckGrid::power(3, k));
      return build_toy_baker(PlanckGrid(n));
    }
    if (kind == "walsh") {
      if (k < 1) throw std::invalid_argument("walsh needs --k");
      return build_walsh_open_baker(D, k, kept, assembly());
    }
    if (kind == "walsh-2baker") {
      if (k < 1) throw std::invalid_argument("walsh-2baker needs --k");
      return build_walsh_2baker(k, assembly());
    }
    if (kind == "walsh-4baker") {
      if (k < 1) throw std::invalid_argument("walsh-4baker needs --k");
      return build_walsh_4baker(k, assembly());
    }
    throw std::invalid_argument("unknown kind " + kind);
  }

  nlohmann::json to_json() const {
    return {{"kind", kind}, {"N", N}, {"k", k}, {"D", D}, {"D1", D1}, {"D2", D2},
            {"l1", l1},     {"l2", l2}, {"kept", kept}, {"path", path}};
  }
};

void write_outputs(RunManifest& m, const fs::path& out, const std::string& content, const Timer& t) {
  atomic_write(out, content);
  m.add_output(out, content);
  m.timings["total_seconds"] = t.seconds();
  m.timestamp = utc_timestamp();
  fs::path man = out;
  man += ".manifest.json";
  atomic_write(man, m.to_json().dump(2) + "\n");
}

int apply_thread_cap() {
  int threads = 1;
  if (const char* env = std::getenv("OQMAP_THREADS")) {
    try {
      threads = std::max(1, std::stoi(env));
    } catch (const std::exception&) {
      throw std::invalid_argument("OQMAP_THREADS must be a positive integer");
    }
  }
  Eigen::setNbThreads(threads);
  return threads;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Open quantum baker maps: builders, resonance spectra, Weyl counts and transport"};
  app.require_subcommand(1);
  std::size_t max_dim = max_dimension();
  app.add_option("--max-dimension", max_dim, "size guard for dense builders");

  // build
  auto* build = app.add_subcommand("build", "build a quantum map and write the matrix");
  MapOptions build_map;
  build_map.add_to(build, "open-baker,toy,walsh,walsh-2baker,walsh-4baker");
  std::string build_format = "json";
  fs::path build_out = "matrix.json";
  build->add_option("--format", build_format, "json or binary")->check(CLI::IsMember({"json", "binary"}));
  build->add_option("--output,-o", build_out, "matrix file");

  // spectrum
  auto* spectrum = app.add_subcommand("spectrum", "eigenvalues of a quantum map");
  MapOptions spec_map;
  spec_map.add_to(spectrum, "open-baker,toy,walsh,walsh-2baker,walsh-4baker");
  bool oracle = false, nontrivial = false;
  double eig_tol = 1e-8, oracle_tol = 1e-7, zero_threshold = 1e-6;
  fs::path spec_out = "spectrum.csv";
  spectrum->add_flag("--oracle", oracle, "compare with the necklace-orbit spectrum (toy, walsh)");
  spectrum->add_flag("--nontrivial", nontrivial, "walsh: solve only on the invariant subspace of nonzero eigenvalues");
  spectrum->add_option("--tol", eig_tol, "eigenpair backward error tolerance");
  spectrum->add_option("--oracle-tol", oracle_tol, "max matched distance");
  spectrum->add_option("--zero-threshold", zero_threshold, "moduli below this count as kernel");
  spectrum->add_option("--output,-o", spec_out, "spectrum CSV");

  // weyl
  auto* weyl = app.add_subcommand("weyl", "resonance counts along N = D^k and the fitted exponent");
  std::string weyl_kind = "toy", weyl_source = "numerical";
  int weyl_kmin = 1, weyl_kmax = 6;
  double weyl_r = 0.5, weyl_tie = 1e-10;
  fs::path weyl_out = "weyl.csv";
  weyl->add_option("--kind", weyl_kind)->check(CLI::IsMember({"toy", "open-baker"}));
  weyl->add_option("--source", weyl_source)->check(CLI::IsMember({"numerical", "analytic"}));
  weyl->add_option("--kmin", weyl_kmin);
  weyl->add_option("--kmax", weyl_kmax);
  weyl->add_option("--r", weyl_r, "radius");
  weyl->add_option("--tie-tol", weyl_tie);
  weyl->add_option("--output,-o", weyl_out);

  // table2
  auto* table2 = app.add_subcommand("table2", "counts #{|lambda| >= r} for the symmetric 3-baker, N = 3^k");
  int t2_kmax = 6;
  double t2_tie = 1e-10;
  fs::path t2_out = "table2.csv";
  table2->add_option("--kmax", t2_kmax)->check(CLI::Range(1, 8));
  table2->add_option("--tie-tol", t2_tie);
  table2->add_option("--output,-o", t2_out);

  // transport
  auto* transport = app.add_subcommand("transport", "conductance and shot noise of the D=4 two-lead model");
  int tr_k = 4, tr_grid = 16;
  std::string tr_path = "dense", tr_map = "walsh";
  double tr_tail = 1e-10, tr_theta_cut = 0.2;
  int tr_m_max = -1;
  fs::path tr_out = "transport.csv", tr_eig_out;
  transport->add_option("--k", tr_k);
  transport->add_option("--theta-grid", tr_grid, "number of equispaced quasi-energies");
  transport->add_option("--path", tr_path)->check(CLI::IsMember({"dense", "tensor"}));
  transport->add_option("--map", tr_map, "walsh or dft (dense path only)")->check(CLI::IsMember({"walsh", "dft"}));
  transport->add_option("--tail-tol", tr_tail);
  transport->add_option("--theta-cut", tr_theta_cut, "tensor path cutoff fraction");
  transport->add_option("--m-max", tr_m_max, "tensor path: steps past n=k (overrides --theta-cut)");
  transport->add_option("--output,-o", tr_out);
  transport->add_option("--eigenvalues-output", tr_eig_out, "transmission eigenvalues at theta=0 (dense)");

  // classical
  auto* classical = app.add_subcommand("classical", "escape times and box counting for the classical open baker");
  std::string cl_mode = "boxcount";
  int cl_D1 = 3, cl_D2 = 3, cl_l1 = 0, cl_l2 = 2, cl_depth = 12, cl_steps = 30, cl_samples = 100000;
  std::uint64_t cl_seed = 1;
  fs::path cl_out = "classical.csv";
  classical->add_option("--mode", cl_mode)->check(CLI::IsMember({"boxcount", "escape"}));
  classical->add_option("--D1", cl_D1);
  classical->add_option("--D2", cl_D2);
  classical->add_option("--l1", cl_l1);
  classical->add_option("--l2", cl_l2);
  classical->add_option("--depth", cl_depth, "maximal box-count depth");
  classical->add_option("--max-steps", cl_steps);
  classical->add_option("--samples", cl_samples);
  classical->add_option("--seed", cl_seed);
  classical->add_option("--output,-o", cl_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    set_max_dimension(max_dim);
    const int threads = apply_thread_cap();
    Timer timer;
    RunManifest man;
    man.parameters["threads"] = threads;
    man.parameters["max_dimension"] = max_dim;

    if (*build) {
      man.command = "build";
      man.parameters["map"] = build_map.to_json();
      man.parameters["format"] = build_format;
      QuantumMap q = build_map.build();
      man.results["builder"] = builder_to_json(q.builder);
      man.results["N"] = q.grid.N();
      const std::string content =
          build_format == "json" ? matrix_to_json(q.matrix).dump() + "\n" : matrix_to_binary(q.matrix);
      write_outputs(man, build_out, content, timer);
      std::cout << "wrote " << build_out.string() << " (" << q.grid.N() << "x" << q.grid.N() << ")\n";
      return 0;
    }

    if (*spectrum) {
      man.command = "spectrum";
      man.parameters["map"] = spec_map.to_json();
      man.parameters["oracle"] = oracle;
      man.parameters["nontrivial"] = nontrivial;
      man.tolerances = {{"eig_tol", eig_tol}, {"oracle_tol", oracle_tol}, {"zero_threshold", zero_threshold}};
      ResonanceSpectrum spec;
      int D = 0, k = 0;
      std::vector<int> kept;
      if (spec_map.kind == "toy") {
        D = 3;
        kept = {0, 2};
        const QuantumMap q = spec_map.build();
        k = q.grid.k().value_or(0);
        if (k == 0) {
          std::size_t n = q.grid.N();
          int kk = 0;
          while (n % 3 == 0) n /= 3, ++kk;
          if (n == 1) k = kk;
        }
        spec = nontrivial ? walsh_nontrivial_spectrum(3, k, kept, eig_tol) : eigenvalues(q, eig_tol);
      } else if (spec_map.kind == "walsh") {
        D = spec_map.D;
        k = spec_map.k;
        kept = spec_map.kept;
        spec = nontrivial ? walsh_nontrivial_spectrum(D, k, kept, eig_tol) : eigenvalues(spec_map.build(), eig_tol);
      } else {
        if (nontrivial) throw std::invalid_argument("--nontrivial applies to toy and walsh maps only");
        spec = eigenvalues(spec_map.build(), eig_tol);
      }
      man.results["max_backward_error"] = spec.max_backward_error;
      man.results["eigenvalues"] = spec.total_multiplicity();
      if (oracle) {
        if (D == 0 || k < 1) throw std::invalid_argument("--oracle needs a toy map with N = 3^k or a walsh map");
        const OmegaBlock block = omega_block(D, kept);
        if (block.block.rows() != 2) throw std::invalid_argument("--oracle needs exactly two kept strips");
        const ResonanceSpectrum ana = walsh_analytic_spectrum(k, block);
        // nilpotent Jordan chains blur the kernel of a full dense solve, so the
        // match runs on the invariant subspace carrying the nonzero spectrum
        const ResonanceSpectrum nt = nontrivial ? spec : walsh_nontrivial_spectrum(D, k, kept, eig_tol);
        const OracleReport rep = oracle_match(nt, ana, oracle_tol, zero_threshold);
        man.results["full_solve_nonzero"] = spec.nonzero_multiplicity(zero_threshold);
        man.results["oracle"] = {{"ok", rep.ok},
                                 {"max_distance", rep.max_distance},
                                 {"numerical_nonzero", rep.numerical_nonzero},
                                 {"analytic_nonzero", rep.analytic_nonzero},
                                 {"numerical_zero", rep.numerical_zero},
                                 {"message", rep.message}};
        std::cout << "oracle max distance = " << format_double(rep.max_distance) << (rep.ok ? " < " : " >= ")
                  << format_double(oracle_tol) << " (" << rep.numerical_nonzero << " nonzero eigenvalues, "
                  << rep.message << ")\n";
        write_outputs(man, spec_out, spectrum_csv(spec), timer);
        return rep.ok ? 0 : 1;
      }
      write_outputs(man, spec_out, spectrum_csv(spec), timer);
      std::cout << "wrote " << spec.total_multiplicity() << " eigenvalues to " << spec_out.string() << "\n";
      return 0;
    }

    if (*weyl) {
      man.command = "weyl";
      man.parameters.update({{"kind", weyl_kind}, {"source", weyl_source}, {"kmin", weyl_kmin}, {"kmax", weyl_kmax},
                             {"r", weyl_r}});
      man.tolerances = {{"tie_tol", weyl_tie}};
      if (weyl_kmin < 1 || weyl_kmax < weyl_kmin) throw std::invalid_argument("need 1 <= kmin <= kmax");
      if (weyl_source == "analytic" && weyl_kind != "toy") throw std::invalid_argument("analytic counts exist for the toy map only");
      std::vector<WeylRow> rows;
      std::vector<WeylPoint> pts;
      for (int k = weyl_kmin; k <= weyl_kmax; ++k) {
        const PlanckGrid grid = PlanckGrid::power(3, k);
        ResonanceSpectrum s;
        if (weyl_source == "analytic") s = walsh_analytic_spectrum(k, omega_block(3, {0, 2}));
        else if (weyl_kind == "toy") s = eigenvalues(build_toy_baker(grid));
        else s = eigenvalues(build_open_baker(BakerParams::three_baker(), grid));
        const int c = count_at_radius(s, weyl_r, weyl_tie);
        rows.push_back({k, grid.N(), weyl_r, c});
        if (c > 0) pts.push_back({static_cast<double>(grid.N()), static_cast<double>(c)});
      }
      std::ostringstream counts;
      for (std::size_t i = 0; i < rows.size(); ++i) counts << (i ? "," : "") << rows[i].count;
      std::cout << "counts " << counts.str() << "\n";
      if (pts.size() >= 3) {
        const double slope = weyl_fit(pts);
        man.results["slope"] = slope;
        std::cout << "slope " << format_double(slope) << " (log2/log3 = " << format_double(std::log(2.0) / std::log(3.0))
                  << ")\n";
      }
      write_outputs(man, weyl_out, weyl_csv(rows), timer);
      return 0;
    }

    if (*table2) {
      man.command = "table2";
      man.parameters["kmax"] = t2_kmax;
      man.tolerances = {{"tie_tol", t2_tie}};
      std::vector<WeylRow> rows;
      int mismatches = 0, compared = 0;
      const auto& ref = reference_weyl_counts();
      for (int k = 1; k <= t2_kmax; ++k) {
        const PlanckGrid grid = PlanckGrid::power(3, k);
        const ResonanceSpectrum s = eigenvalues(build_open_baker(BakerParams::three_baker(), grid));
        const auto radii = weyl_table_radii();
        for (std::size_t i = 0; i < radii.size(); ++i) {
          const int c = count_at_radius(s, radii[i], t2_tie);
          rows.push_back({k, grid.N(), radii[i], c});
          if (k <= static_cast<int>(ref.size())) {
            ++compared;
            if (c != ref[static_cast<std::size_t>(k - 1)][i]) ++mismatches;
          }
        }
        std::cout << "k=" << k << ":";
        for (std::size_t i = rows.size() - radii.size(); i < rows.size(); ++i) std::cout << ' ' << rows[i].count;
        std::cout << "\n";
      }
      man.results["published_mismatches"] = mismatches;
      man.results["published_compared"] = compared;
      std::cout << "published counts matched: " << (compared - mismatches) << "/" << compared << "\n";
      write_outputs(man, t2_out, weyl_csv(rows), timer);
      return 0;
    }

    if (*transport) {
      man.command = "transport";
      man.parameters.update({{"k", tr_k}, {"theta_grid", tr_grid}, {"path", tr_path}, {"map", tr_map},
                             {"theta_cut", tr_theta_cut}});
      man.tolerances = {{"tail_tol", tr_tail}};
      const auto thetas = theta_grid(tr_grid);
      TransmissionOptions opts;
      opts.tail_tol = tr_tail;
      TransportReport rep;
      if (tr_path == "tensor") {
        if (tr_map != "walsh") throw std::invalid_argument("the tensor path exists for the walsh map only");
        const int m_max = tr_m_max >= 0 ? tr_m_max : theta_cut_steps(tr_k, tr_theta_cut);
        man.parameters["m_max"] = m_max;
        rep = transport_summary_tensor(tr_k, thetas, m_max);
      } else {
        if (tr_k < 1 || tr_k > transport_limits().dense_max_k) {
          throw std::invalid_argument("dense transport supports 1 <= k <= " + std::to_string(transport_limits().dense_max_k));
        }
        const QuantumMap U = tr_map == "walsh" ? build_walsh_4baker(tr_k) : build_dft_4baker(tr_k);
        rep = transport_summary_dense(U, thetas, opts);
        if (!tr_eig_out.empty()) {
          const auto tm = transmission_matrix(U, LeadConfig(tr_k), 0.0, opts);
          const std::string csv = transmission_eigenvalues_csv(transmission_eigenvalues(tm.t));
          atomic_write(tr_eig_out, csv);
          man.add_output(tr_eig_out, csv);
        }
      }
      const double M = static_cast<double>(LeadConfig(tr_k).M());
      man.results = {{"mean_g", rep.mean_g},        {"std_g", rep.std_g},   {"mean_P", rep.mean_P},
                     {"mean_F", rep.mean_F},        {"g_over_M", rep.mean_g / M},
                     {"P_over_2k1", rep.mean_P / std::ldexp(1.0, tr_k - 1)}};
      std::cout << "k=" << tr_k << " path=" << rep.path << " map=" << tr_map << "\n"
                << "mean g/M = " << format_double(rep.mean_g / M) << " (std/mean "
                << format_double(rep.mean_g > 0 ? rep.std_g / rep.mean_g : 0.0) << ")\n"
                << "mean P/2^(k-1) = " << format_double(rep.mean_P / std::ldexp(1.0, tr_k - 1)) << "\n"
                << "mean F = " << format_double(rep.mean_F) << "\n";
      write_outputs(man, tr_out, transport_csv(rep), timer);
      return 0;
    }

    if (*classical) {
      man.command = "classical";
      BakerParams p{cl_D1, cl_D2, cl_l1, cl_l2};
      p.validate();
      man.parameters.update({{"mode", cl_mode}, {"D1", cl_D1}, {"D2", cl_D2}, {"l1", cl_l1}, {"l2", cl_l2}});
      std::string csv;
      if (cl_mode == "boxcount") {
        man.parameters["depth"] = cl_depth;
        std::vector<BoxCount> rows;
        for (int d = 2; d <= cl_depth; ++d) rows.push_back(boxcount_trapped(p, d));
        man.results["dimension"] = cantor_dimension(cl_D1, cl_D2);
        csv = boxcount_csv(rows);
        std::cout << "dimension " << format_double(cantor_dimension(cl_D1, cl_D2)) << ", depth " << cl_depth
                  << " estimate " << format_double(rows.back().estimate) << "\n";
      } else {
        if (cl_samples < 1) throw std::invalid_argument("--samples must be positive");
        man.parameters.update({{"samples", cl_samples}, {"max_steps", cl_steps}, {"seed", cl_seed}});
        std::mt19937_64 rng(cl_seed);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::vector<Point> pts;
        for (int i = 0; i < cl_samples; ++i) {
          const double q = u(rng);
          const double pp = u(rng);
          pts.push_back(make_point(q, pp));
        }
        const EscapeHistogram h = escape_time_histogram(p, pts, cl_steps);
        man.results["trapped"] = h.trapped;
        csv = escape_histogram_csv(h);
        std::cout << "trapped after " << cl_steps << " steps: " << h.trapped << "/" << cl_samples << "\n";
      }
      write_outputs(man, cl_out, csv, timer);
      return 0;
    }
  } catch (const SizeLimitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
