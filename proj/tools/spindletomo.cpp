#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "spindle/analytic.hpp"
#include "spindle/io.hpp"
#include "spindle/phantom.hpp"
#include "spindle/physics.hpp"
#include "spindle/recon.hpp"
#include "spindle/sparse.hpp"

using namespace spindle;

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string labels_path_for(const std::string& out) {
  const std::filesystem::path p(out);
  return (p.parent_path() / (p.stem().string() + ".labels" + p.extension().string())).string();
}

SurfaceQuadrature quad_or_auto(std::size_t theta, std::size_t phi, std::size_t radial, std::size_t n) {
  auto q = auto_quadrature(n);
  if (theta) q.n_theta = theta;
  if (phi) q.n_phi = phi;
  if (radial) q.n_radial = radial;
  return q;
}

void require_same_shape(const VolumeShape& a, const VolumeShape& b, const std::string& what) {
  if (!(a == b))
    throw std::invalid_argument(what + ": volume is n=" + std::to_string(a.n) + ", expected n=" + std::to_string(b.n));
}

// Rows computed one by one, with progress on stderr for long runs.
template <class Fn>
ScatterData evaluate_rows(const ScanGrid& grid, Fn&& fn) {
  ScatterData out(grid);
  const std::size_t na = grid.alpha_values.size(), nb = grid.beta_values.size();
  for (std::size_t row = 0; row < grid.size(); ++row) {
    const std::size_t ir = row / (na * nb), ia = (row / nb) % na, ib = row % nb;
    out.values[row] = fn(grid.r_values[ir], grid.alpha_values[ia], grid.beta_values[ib]);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compton scatter tomography over spindle tori"};
  app.require_subcommand(1);

  // phantom
  auto* ph = app.add_subcommand("phantom", "Voxelize a phantom (density and material labels)");
  std::string ph_preset, ph_spec, ph_out, ph_labels;
  std::size_t ph_n = 50;
  auto* ph_preset_opt = ph->add_option("--preset", ph_preset, "Built-in phantom (paper)");
  auto* ph_spec_opt = ph->add_option("--spec", ph_spec, "Phantom JSON file");
  ph_preset_opt->excludes(ph_spec_opt);
  auto* ph_n_opt = ph->add_option("--n", ph_n, "Voxels per axis")->check(CLI::PositiveNumber);
  ph->add_option("--out", ph_out, "Density volume")->required();
  ph->add_option("--labels-out", ph_labels, "Label volume (default: <out stem>.labels<ext>)");

  // matrix
  auto* mx = app.add_subcommand("matrix", "Assemble the discrete forward operator");
  std::string mx_kind = "spindle", mx_out;
  std::size_t mx_nr = 25, mx_na = 45, mx_nb = 45, mx_n = 50, mx_qt = 0, mx_qp = 0, mx_qr = 0;
  unsigned mx_threads = 0;
  mx->add_option("--transform", mx_kind, "spindle|interior|apple|apple-interior");
  mx->add_option("--nr", mx_nr)->check(CLI::PositiveNumber);
  mx->add_option("--nalpha", mx_na)->check(CLI::PositiveNumber);
  mx->add_option("--nbeta", mx_nb)->check(CLI::PositiveNumber);
  mx->add_option("--n", mx_n)->check(CLI::PositiveNumber);
  mx->add_option("--out", mx_out)->required();
  mx->add_option("--quad-theta", mx_qt, "Azimuthal nodes per surface (0: automatic)");
  mx->add_option("--quad-phi", mx_qp, "Colatitude nodes per surface (0: automatic)");
  mx->add_option("--quad-radial", mx_qr, "Radial nodes for solid transforms (0: automatic)");
  mx->add_option("--threads", mx_threads, "Worker threads (0: all cores)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Apply a matrix to a phantom and add noise");
  std::string sim_matrix, sim_phantom, sim_out;
  double sim_noise = 0.0;
  std::uint64_t sim_seed = 0;
  sim->add_option("--matrix", sim_matrix)->required();
  sim->add_option("--phantom", sim_phantom)->required();
  sim->add_option("--noise", sim_noise, "Relative noise level eps")->check(CLI::NonNegativeNumber);
  sim->add_option("--seed", sim_seed);
  sim->add_option("--out", sim_out)->required();

  // simulate-analytic
  auto* sa = app.add_subcommand("simulate-analytic", "Matrix-free data on the harmonic inversion grid");
  std::string sa_phantom, sa_kind = "spindle", sa_out;
  int sa_lmax = 8;
  double sa_eps1 = 0.5, sa_eps2 = 0.9, sa_noise = 0.0;
  std::uint64_t sa_seed = 0;
  std::size_t sa_nr = 128, sa_qt = 180, sa_qp = 90, sa_qr = 64;
  sa->add_option("--phantom", sa_phantom)->required();
  sa->add_option("--transform", sa_kind);
  sa->add_option("--lmax", sa_lmax)->check(CLI::NonNegativeNumber);
  sa->add_option("--eps1", sa_eps1);
  sa->add_option("--eps2", sa_eps2);
  sa->add_option("--nr", sa_nr, "Radial samples")->check(CLI::PositiveNumber);
  sa->add_option("--noise", sa_noise)->check(CLI::NonNegativeNumber);
  sa->add_option("--seed", sa_seed);
  sa->add_option("--quad-theta", sa_qt);
  sa->add_option("--quad-phi", sa_qp);
  sa->add_option("--quad-radial", sa_qr);
  sa->add_option("--out", sa_out)->required();

  // simulate-physics
  auto* sp = app.add_subcommand("simulate-physics", "Physical intensities with optional attenuation");
  std::string sp_phantom, sp_labels, sp_materials, sp_source = "mono:2824", sp_att = "off", sp_out, sp_stable;
  double sp_scale = 20.0, sp_zavg = 7.0, sp_area = 1e-4;
  std::size_t sp_nr = 25, sp_na = 45, sp_nb = 45, sp_qt = 0, sp_qp = 0, sp_qr = 0, sp_nt = 16;
  unsigned sp_threads = 0;
  sp->add_option("--phantom", sp_phantom)->required();
  sp->add_option("--labels", sp_labels, "Label volume (required with --attenuation on)");
  sp->add_option("--materials", sp_materials, "Directory with materials.json (required with --attenuation on)");
  sp->add_option("--source", sp_source, "mono:<keV> or spectrum:<csv>");
  sp->add_option("--attenuation", sp_att)->check(CLI::IsMember({"on", "off"}));
  sp->add_option("--scale-cm", sp_scale, "Edge length of the scanned cube in cm")->check(CLI::PositiveNumber);
  sp->add_option("--scattering-table", sp_stable, "S(q, Z) CSV (default: free electrons, S = 1)");
  sp->add_option("--z-avg", sp_zavg)->check(CLI::PositiveNumber);
  sp->add_option("--detector-area", sp_area, "m^2")->check(CLI::NonNegativeNumber);
  sp->add_option("--nr", sp_nr)->check(CLI::PositiveNumber);
  sp->add_option("--nalpha", sp_na)->check(CLI::PositiveNumber);
  sp->add_option("--nbeta", sp_nb)->check(CLI::PositiveNumber);
  sp->add_option("--quad-theta", sp_qt);
  sp->add_option("--quad-phi", sp_qp);
  sp->add_option("--quad-radial", sp_qr);
  sp->add_option("--energy-nodes", sp_nt, "Quadrature nodes over t for spectra")->check(CLI::PositiveNumber);
  sp->add_option("--threads", sp_threads);
  sp->add_option("--out", sp_out)->required();

  // recon
  auto* rc = app.add_subcommand("recon", "Reconstruct a volume");
  rc->require_subcommand(1);
  auto* cg = rc->add_subcommand("cgls", "Tikhonov-regularized CGLS");
  std::string cg_matrix, cg_data, cg_out, cg_trace;
  double cg_lambda = 0.0;
  int cg_iters = 2000;
  bool cg_clip = false, cg_lower = false, cg_fold = false, cg_ignore_hash = false;
  cg->add_option("--matrix", cg_matrix)->required();
  cg->add_option("--data", cg_data)->required();
  cg->add_option("--lambda", cg_lambda)->check(CLI::NonNegativeNumber);
  cg->add_option("--iters", cg_iters)->check(CLI::PositiveNumber);
  cg->add_flag("--clip-negative", cg_clip);
  cg->add_flag("--zero-lower", cg_lower);
  cg->add_flag("--fold", cg_fold, "Add lower-half voxels onto their antipodes before clipping");
  cg->add_flag("--ignore-physics-hash", cg_ignore_hash, "Accept data simulated with a physics model");
  cg->add_option("--out", cg_out)->required();
  cg->add_option("--trace", cg_trace, "Convergence CSV");

  auto* an = rc->add_subcommand("analytic", "Harmonic (Volterra) inversion");
  std::string an_data, an_kind = "spindle", an_out;
  int an_lmax = 8;
  double an_eps1 = 0.5, an_eps2 = 0.9;
  std::size_t an_n = 50, an_refine = 4;
  an->add_option("--data", an_data)->required();
  an->add_option("--transform", an_kind);
  an->add_option("--lmax", an_lmax)->check(CLI::NonNegativeNumber);
  an->add_option("--eps1", an_eps1);
  an->add_option("--eps2", an_eps2);
  an->add_option("--n", an_n, "Output voxels per axis")->check(CLI::PositiveNumber);
  an->add_option("--refine", an_refine, "Volterra grid refinement")->check(CLI::PositiveNumber);
  an->add_option("--out", an_out)->required();

  // slice
  auto* sl = app.add_subcommand("slice", "Write one slice as PGM (min-max window) or CSV");
  std::string sl_vol, sl_axis = "z", sl_out;
  std::size_t sl_index = 0;
  sl->add_option("--vol", sl_vol)->required();
  sl->add_option("--axis", sl_axis)->check(CLI::IsMember({"x", "y", "z"}));
  sl->add_option("--index", sl_index)->required();
  sl->add_option("--out", sl_out)->required();

  // diff
  auto* df = app.add_subcommand("diff", "Relative L2 error |a - b| / |b|");
  std::string df_a, df_b;
  df->add_option("--a", df_a)->required();
  df->add_option("--b", df_b)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ph) {
      if (ph_preset.empty() == ph_spec.empty()) throw std::invalid_argument("give exactly one of --preset or --spec");
      PhantomSpec spec = ph_preset.empty() ? PhantomSpec::from_json(read_text(ph_spec)) : PhantomSpec::preset(ph_preset, ph_n);
      if (ph_n_opt->count()) spec.n = ph_n;
      const auto p = build_phantom(spec);
      if (p.clipped)
        std::cerr << "warning: " << p.clipped << " voxels with x3 <= 0 were clipped from the phantom\n";
      if (ph_labels.empty()) ph_labels = labels_path_for(ph_out);
      write_volume(ph_out, p.density);
      write_volume(ph_labels, p.labels);
      std::cout << "phantom n=" << spec.n << " -> " << ph_out << ", labels -> " << ph_labels << "\n";
    } else if (*mx) {
      const auto kind = parse_transform_kind(mx_kind);
      MatrixOptions opts;
      opts.quad = quad_or_auto(mx_qt, mx_qp, mx_qr, mx_n);
      opts.threads = mx_threads;
      const auto a = build_matrix(kind, ScanGrid::acquisition(mx_nr, mx_na, mx_nb), VolumeShape{mx_n, 1.0}, opts);
      write_matrix(mx_out, a);
      std::cout << "matrix " << a.rows() << " x " << a.cols() << ", nnz " << a.nnz() << " -> " << mx_out << "\n";
    } else if (*sim) {
      const auto a = read_matrix(sim_matrix);
      const auto f = read_volume(sim_phantom);
      require_same_shape(f.shape, a.shape, sim_phantom);
      DataFile out{ScatterData(a.grid), a.kind, ""};
      out.data.values = add_noise(a.apply(f.values), sim_noise, sim_seed);
      write_data(sim_out, out);
      std::cout << "data " << out.data.values.size() << " samples -> " << sim_out << "\n";
    } else if (*sa) {
      AnalyticPlan plan;
      plan.kind = parse_transform_kind(sa_kind);
      plan.eps1 = sa_eps1;
      plan.eps2 = sa_eps2;
      plan.lmax = sa_lmax;
      plan.n_radial = sa_nr;
      plan.validate();
      const auto f = read_volume(sa_phantom);
      const Density density = [&f](const Vec3& x) { return f.sample(x); };
      DataFile out{forward_quad(plan.kind, density, plan.scan_grid(), {sa_qt, sa_qp, sa_qr}), plan.kind, ""};
      out.data.values = add_noise(out.data.values, sa_noise, sa_seed);
      write_data(sa_out, out);
      std::cout << "data " << out.data.values.size() << " samples -> " << sa_out << "\n";
    } else if (*sp) {
      PhysicsConfig cfg;
      cfg.scale_cm = sp_scale;
      cfg.z_avg = sp_zavg;
      cfg.detector_area = sp_area;
      cfg.attenuation = sp_att == "on";
      cfg.materials_dir = sp_materials;
      if (sp_source.rfind("mono:", 0) == 0) {
        cfg.source_kev = std::stod(sp_source.substr(5));
      } else if (sp_source.rfind("spectrum:", 0) == 0) {
        cfg.spectrum_path = sp_source.substr(9);
        cfg.spectrum = Spectrum::read_csv(cfg.spectrum_path);
      } else {
        throw std::invalid_argument("--source must be mono:<keV> or spectrum:<csv>");
      }
      cfg.validate();
      const auto f = read_volume(sp_phantom);
      std::optional<ScatteringFactorTable> table;
      if (!sp_stable.empty()) table = ScatteringFactorTable::read_csv(sp_stable);
      const ScatteringFactorTable* tp = table ? &*table : nullptr;
      const auto q = quad_or_auto(sp_qt, sp_qp, sp_qr, f.n());
      const auto grid = ScanGrid::acquisition(sp_nr, sp_na, sp_nb);
      const auto kind = cfg.spectrum ? TransformKind::interior : TransformKind::spindle;
      ScatterData data = cfg.spectrum ? evaluate_rows(grid, [&](double r, double a, double b) {
        return poly_intensity(f, r, a, b, cfg, tp, q, sp_nt);
      })
                                      : evaluate_rows(grid, [&](double r, double a, double b) {
                                          return mono_intensity(f, r, a, b, cfg, tp, q);
                                        });
      if (cfg.attenuation) {
        if (sp_labels.empty() || sp_materials.empty())
          throw std::invalid_argument("--attenuation on needs --labels and --materials");
        const auto labels = read_volume(sp_labels);
        require_same_shape(labels.shape, f.shape, sp_labels);
        const auto materials = MaterialMap::load(sp_materials, labels.labels);
        data = attenuate(data, kind, f, labels, materials, cfg, q, sp_threads);
      }
      if (tp && tp->clamped()) std::cerr << "warning: " << tp->clamped() << " scattering factor lookups clamped\n";
      write_data(sp_out, DataFile{std::move(data), kind, cfg.hash()});
      std::cout << to_string(kind) << " intensities, physics " << cfg.hash() << " -> " << sp_out << "\n";
    } else if (*cg) {
      const auto a = read_matrix(cg_matrix);
      const auto d = read_data(cg_data);
      if (!(d.data.grid == a.grid) || d.kind != a.kind)
        throw std::invalid_argument("data grid or transform does not match the matrix");
      if (!d.physics_hash.empty() && !cg_ignore_hash)
        throw std::invalid_argument("data carry physics model " + d.physics_hash +
                                    " that the matrix does not include (override with --ignore-physics-hash)");
      CglsConfig cfg;
      cfg.lambda = cg_lambda;
      cfg.max_iters = cg_iters;
      const auto res = cgls_solve(a, d.data.values, cfg);
      if (!cg_trace.empty()) write_trace_csv(cg_trace, res.trace);
      write_volume(cg_out, postprocess(res.x, a.shape, {cg_fold, cg_clip, cg_lower}));
      std::cout << "cgls " << res.iterations << " iterations, residual " << res.trace.back().residual << " -> "
                << cg_out << "\n";
    } else if (*an) {
      const auto d = read_data(an_data);
      AnalyticPlan plan;
      plan.kind = parse_transform_kind(an_kind);
      if (plan.kind != d.kind) throw std::invalid_argument("data hold " + to_string(d.kind) + " samples");
      plan.eps1 = an_eps1;
      plan.eps2 = an_eps2;
      plan.lmax = an_lmax;
      plan.n_radial = d.data.grid.r_values.size();
      plan.refine = an_refine;
      plan.validate();
      const auto expect = plan.scan_grid(d.data.grid.alpha_values.size(), d.data.grid.beta_values.size());
      for (std::size_t i = 0; i < expect.r_values.size(); ++i)
        if (std::abs(expect.r_values[i] - d.data.grid.r_values[i]) > 1e-12 * expect.r_values[i])
          throw std::invalid_argument("data offsets do not match --eps1/--eps2 for this transform");
      write_volume(an_out, invert_analytic(d.data, plan, VolumeShape{an_n, 1.0}));
      std::cout << "analytic inversion lmax=" << an_lmax << " -> " << an_out << "\n";
    } else if (*sl) {
      const auto v = read_volume(sl_vol);
      const auto axis = parse_slice_axis(sl_axis);
      if (std::filesystem::path(sl_out).extension() == ".csv")
        write_slice_csv(sl_out, v, axis, sl_index);
      else
        write_slice_pgm(sl_out, v, axis, sl_index);
    } else if (*df) {
      const auto a = read_volume(df_a), b = read_volume(df_b);
      require_same_shape(a.shape, b.shape, df_a);
      std::cout.precision(17);
      std::cout << relative_l2_error(a.values, b.values) << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "spindletomo: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
