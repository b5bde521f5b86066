//! Experiment drivers behind the command-line frontend: configuration
//! parsing with strict validation, the four subcommand entry points, and
//! deterministic seeded output.

use anyhow::{anyhow, Context, Result};
use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use wedgeqft::car::{b_norm_formula, operator_norm, CarRep};
use wedgeqft::geometry::{
    causal_complement, coherent_family_key, frw_edge_from_image, frw_edge_image,
    wedge_inclusion_sampled, wedge_membership, FRWChart, FrwEdge, SpacetimePoint, Wedge,
};
use wedgeqft::scalar::{MassShellFunction, MassShellGrid};
use wedgeqft::spectral::{
    max_abs, rieffel_product, warp, warp_oscillatory, AxisGrid, CutoffKind, CutoffSpec,
    DeformationMatrix, JointSpectrumRep, Operator,
};
use wedgeqft::thermal::{deformed_npoint, two_point_closed, SpatialTheta, ThermalRep};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;

/// Top-level configuration file: one section per subcommand. Unknown
/// fields are rejected everywhere; the published schema lives under
/// `schemas/runconfig.schema.json`.
#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub npoint: Option<NpointConfig>,
    pub geometry: Option<GeometryConfig>,
    pub verify: Option<VerifyConfig>,
    pub car: Option<CarConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NpointConfig {
    pub mass: f64,
    pub beta: f64,
    /// "line" (x axis) or "plane" (the x2-x3 edge plane, which the
    /// deformation acts in).
    pub grid_kind: String,
    pub grid_halfwidth: i32,
    pub grid_spacing: f64,
    pub n_max: u8,
    pub n: usize,
    pub kappas: Vec<f64>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_tolerance() -> f64 {
    1e-10
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    /// membership | complement | inclusion | coherent-key
    pub query: String,
    pub wedge: Wedge,
    pub other: Option<Wedge>,
    pub point: Option<Vec<f64>>,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    10_000
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    /// Negative control: skips the antisymmetrization of theta so the
    /// suite must fail on the "theta antisymmetry" invariant.
    #[serde(default)]
    pub break_theta_antisymmetry: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarConfig {
    pub d: usize,
    pub kappas: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let cfg: RunConfig = serde_json::from_str(&text).context("config does not match schema")?;
    Ok(cfg)
}

fn validate_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 {
        Ok(())
    } else {
        Err(anyhow!("{name} must be positive, got {v}"))
    }
}

pub fn write_output(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, content)
            .with_context(|| format!("cannot write {}", p.display())),
        None => {
            std::io::stdout().write_all(content.as_bytes())?;
            Ok(())
        }
    }
}

fn random_function(
    grid: &Arc<MassShellGrid>,
    rng: &mut ChaCha8Rng,
) -> MassShellFunction {
    let amplitudes = (0..grid.len())
        .map(|_| C64::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0))
        .collect();
    MassShellFunction::new(grid.clone(), amplitudes).unwrap()
}

fn build_grid(cfg: &NpointConfig) -> Result<Arc<MassShellGrid>> {
    validate_positive("mass", cfg.mass)?;
    validate_positive("grid_spacing", cfg.grid_spacing)?;
    if cfg.grid_halfwidth < 0 {
        return Err(anyhow!("grid_halfwidth must be nonnegative"));
    }
    let k = cfg.grid_halfwidth;
    let dp = cfg.grid_spacing;
    let grid = match cfg.grid_kind.as_str() {
        "line" => MassShellGrid::line(cfg.mass, k, dp)?,
        "plane" => {
            // edge-plane grid: nodes in the (x2, x3) plane with product
            // trapezoid weights over the invariant measure
            let axis_weight = |i: i32| if i.abs() == k && k > 0 { 0.5 * dp } else { dp };
            let mut nodes = Vec::new();
            let mut weights = Vec::new();
            for iy in -k..=k {
                for iz in -k..=k {
                    let p = [0.0, iy as f64 * dp, iz as f64 * dp];
                    let eps = (p[1] * p[1] + p[2] * p[2] + cfg.mass * cfg.mass).sqrt();
                    nodes.push(p);
                    weights.push(axis_weight(iy) * axis_weight(iz) / (2.0 * eps));
                }
            }
            MassShellGrid::from_raw(cfg.mass, nodes, weights)?
        }
        other => return Err(anyhow!("unknown grid_kind {other:?}")),
    };
    Ok(Arc::new(grid))
}

#[derive(Debug, Serialize)]
pub struct NpointRow {
    pub functions: String,
    pub kappa: f64,
    pub closed_re: f64,
    pub closed_im: f64,
    pub brute_re: f64,
    pub brute_im: f64,
    pub abs_diff: f64,
}

/// Deformed n-point comparison table over the configured kappa sweep.
/// Exit is numerical-failure when any row misses the tolerance.
pub fn cmd_npoint(
    cfg: &NpointConfig,
    seed: u64,
    format: OutputFormat,
    out: Option<&Path>,
) -> Result<i32> {
    validate_positive("beta", cfg.beta)?;
    if cfg.n == 0 || cfg.n > 6 {
        return Err(anyhow!("n must lie in 1..=6"));
    }
    let grid = build_grid(cfg)?;
    let rep = ThermalRep::new(grid.clone(), cfg.beta, cfg.n_max);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fs: Vec<MassShellFunction> =
        (0..cfg.n).map(|_| random_function(&grid, &mut rng)).collect();
    let ids = (0..cfg.n).map(|i| format!("f{i}")).collect::<Vec<_>>().join("+");

    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for &kappa in &cfg.kappas {
        let theta = SpatialTheta::edge(kappa);
        let cmp = deformed_npoint(&fs, &rep, &theta)?;
        let scale = cmp.closed.norm().max(1.0);
        worst = worst.max(cmp.abs_diff() / scale);
        rows.push(NpointRow {
            functions: ids.clone(),
            kappa,
            closed_re: cmp.closed.re,
            closed_im: cmp.closed.im,
            brute_re: cmp.brute.re,
            brute_im: cmp.brute.im,
            abs_diff: cmp.abs_diff(),
        });
    }

    let content = match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in &rows {
                w.serialize(row)?;
            }
            String::from_utf8(w.into_inner()?)?
        }
        OutputFormat::Json => serde_json::to_string_pretty(&rows)? + "\n",
    };
    write_output(out, &content)?;
    Ok(if worst < cfg.tolerance { EXIT_PASS } else { EXIT_NUMERIC })
}

/// Geometry queries with JSON answers.
pub fn cmd_geometry(cfg: &GeometryConfig, out: Option<&Path>) -> Result<i32> {
    let answer = match cfg.query.as_str() {
        "membership" => {
            let coords = cfg
                .point
                .as_ref()
                .ok_or_else(|| anyhow!("membership query needs a point"))?;
            let point = match &cfg.wedge {
                Wedge::Minkowski4(_) => SpacetimePoint::minkowski(
                    coords
                        .as_slice()
                        .try_into()
                        .map_err(|_| anyhow!("minkowski point needs 4 coordinates"))?,
                ),
                Wedge::DeSitter5(_) => SpacetimePoint::desitter(
                    coords
                        .as_slice()
                        .try_into()
                        .map_err(|_| anyhow!("de sitter point needs 5 coordinates"))?,
                )?,
                Wedge::Frw(_) => {
                    return Err(anyhow!("frw membership needs a chart; not exposed via cli"))
                }
            };
            let inside = wedge_membership(&cfg.wedge, &point, None)?;
            serde_json::json!({ "query": "membership", "inside": inside })
        }
        "complement" => {
            let c = causal_complement(&cfg.wedge);
            serde_json::json!({ "query": "complement", "wedge": c })
        }
        "inclusion" => {
            let other = cfg
                .other
                .as_ref()
                .ok_or_else(|| anyhow!("inclusion query needs a second wedge"))?;
            let verdict = wedge_inclusion_sampled(&cfg.wedge, other, cfg.samples)?;
            serde_json::json!({ "query": "inclusion", "verdict": verdict })
        }
        "coherent-key" => {
            let key = coherent_family_key(&cfg.wedge)?;
            serde_json::json!({ "query": "coherent-key", "key": key })
        }
        other => return Err(anyhow!("unknown geometry query {other:?}")),
    };
    write_output(out, &(serde_json::to_string_pretty(&answer)? + "\n"))?;
    Ok(EXIT_PASS)
}

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub residual: f64,
}

fn check(checks: &mut Vec<Check>, name: &str, residual: f64, tol: f64) {
    checks.push(Check { name: name.to_string(), pass: residual < tol, residual });
}

fn random_rep(rng: &mut ChaCha8Rng, dim: usize) -> Arc<JointSpectrumRep> {
    let eigenvalues = (0..dim)
        .map(|_| [rng.gen_range(-3..=3) as f64, rng.gen_range(-3..=3) as f64])
        .collect();
    Arc::new(JointSpectrumRep::from_eigenvalues(eigenvalues))
}

fn random_operator(rng: &mut ChaCha8Rng, rep: &Arc<JointSpectrumRep>) -> Operator {
    let dim = rep.dim;
    let m = Array2::from_shape_fn((dim, dim), |_| {
        C64::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0)
    });
    Operator::new(rep.clone(), m).unwrap()
}

/// Condensed cross-module invariant suite with a machine-readable
/// summary; the negative control injects a non-antisymmetric theta.
pub fn cmd_verify(cfg: &VerifyConfig, seed: u64, out: Option<&Path>) -> Result<i32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    // deformation matrix under test; the debug flag corrupts one entry
    let mut d = DeformationMatrix::standard(0.7);
    if cfg.break_theta_antisymmetry {
        d.theta[0][1] += 0.25;
    }
    let antisym_residual = (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .map(|(i, j)| (d.theta[i][j] + d.theta[j][i]).abs())
        .fold(0.0f64, f64::max);
    check(&mut checks, "theta antisymmetry", antisym_residual, 1e-12);

    // deformation algebra on random operators
    let rep = random_rep(&mut rng, 5);
    let f = random_operator(&mut rng, &rep);
    let g = random_operator(&mut rng, &rep);
    let id0 = max_abs(&(&warp(&f, &DeformationMatrix::standard(0.0)).matrix - &f.matrix));
    check(&mut checks, "warp kappa=0 identity", id0, 1e-12);
    let adj = max_abs(
        &(&warp(&f.adjoint(), &d).matrix - &warp(&f, &d).adjoint().matrix),
    );
    check(&mut checks, "warp adjoint covariance", adj, 1e-12);
    let prod = rieffel_product(&f, &g, &d)?;
    let hom = max_abs(
        &(&warp(&f, &d).matrix.dot(&warp(&g, &d).matrix) - &warp(&prod, &d).matrix),
    );
    check(&mut checks, "rieffel homomorphism", hom, 1e-12);

    // oscillatory oracle on the two-dimensional closed-form example
    let rep2 = Arc::new(JointSpectrumRep::from_eigenvalues(vec![[1.0, 0.0], [0.0, 1.0]]));
    let fmat = ndarray::array![
        [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
    ];
    let f2 = Operator::new(rep2, fmat).unwrap();
    let dpi = DeformationMatrix::standard(std::f64::consts::PI);
    let spec = CutoffSpec::new(
        CutoffKind::CompactBump { flat: 1.5, support: 3.0 },
        vec![0.5, 0.3, 0.15],
        AxisGrid { extent: 22.0, nodes: 641 },
        AxisGrid { extent: 22.0, nodes: 361 },
    )
    .map_err(|e| anyhow!("{e}"))?;
    let (osc, _) = warp_oscillatory(&f2, &dpi, &spec).map_err(|e| anyhow!("{e}"))?;
    let osc_res = max_abs(&(&osc.matrix - &warp(&f2, &dpi).matrix));
    check(&mut checks, "oscillatory oracle", osc_res, 1e-6);

    // thermal structure on a small line grid
    let grid = Arc::new(MassShellGrid::line(1.0, 2, 0.7)?);
    let trep = ThermalRep::new(grid.clone(), 1.3, 3);
    let tf = random_function(&grid, &mut rng);
    let tg = random_function(&grid, &mut rng);
    let pf = wedgeqft::thermal::thermal_field(&tf, &trep)?;
    let pg = wedgeqft::thermal::thermal_field(&tg, &trep)?;
    let brute2 = trep.vacuum_expectation(&pf.dot(&pg));
    let closed2 = two_point_closed(&tf, &tg, &trep)?;
    check(&mut checks, "thermal two-point closed form", (brute2 - closed2).norm(), 1e-12);
    let rho_res = grid
        .energies
        .iter()
        .zip(&trep.rho)
        .map(|(&e, &r)| ((1.0 + r) - (1.3 * e).exp() * r).abs() / (1.0 + r))
        .fold(0.0f64, f64::max);
    check(&mut checks, "thermal rho identity", rho_res, 1e-12);

    // CAR block
    let car = CarRep::new(3, &[true, true, false], &[1, 2, 0], &[0, 0, 3])
        .map_err(|e| anyhow!("{e}"))?;
    let fvec: Vec<C64> = (0..6)
        .map(|_| C64::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0))
        .collect();
    let gvec: Vec<C64> = (0..6)
        .map(|_| C64::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0))
        .collect();
    let bf = car.b_operator(&fvec).map_err(|e| anyhow!("{e}"))?;
    let bg = car.b_operator(&gvec).map_err(|e| anyhow!("{e}"))?;
    let anti = &bf.dot(&bg) + &bg.dot(&bf);
    let target = car.space.inner(&car.space.conjugate(&fvec), &gvec);
    let mut anti_res: f64 = 0.0;
    for ((i, j), z) in anti.indexed_iter() {
        let t = if i == j { target } else { C64::new(0.0, 0.0) };
        anti_res = anti_res.max((z - t).norm());
    }
    check(&mut checks, "car anticommutation", anti_res, 1e-12);
    let norm_res = (operator_norm(&bf) - b_norm_formula(&car.space, &fvec)).abs();
    check(&mut checks, "car norm formula", norm_res, 1e-10);
    let psi = car.psi(&fvec[3..6]).map_err(|e| anyhow!("{e}"))?;
    let vac = car.deformed_vacuum_check(&psi, -1, 0.9).map_err(|e| anyhow!("{e}"))?;
    check(&mut checks, "car vacuum invariance", vac, 1e-12);
    let engine = max_abs(
        &(&car.sector_deform(&psi, -1, 0.9).map_err(|e| anyhow!("{e}"))?
            - &car.warp_via_spectral(&psi, 0.9)),
    );
    check(&mut checks, "car engine equivalence", engine, 1e-14);

    // geometry block
    let w = Wedge::Minkowski4(
        wedgeqft::geometry::MinkowskiWedge::from_poincare(
            &wedgeqft::geometry::lorentz_boost([0.0, 1.0, 0.0], 0.8),
            [0.3, -0.2, 0.5, 0.1],
        )
        .map_err(|e| anyhow!("{e}"))?,
    );
    let twice = causal_complement(&causal_complement(&w));
    let inv_res = match (&w, &twice) {
        (Wedge::Minkowski4(x), Wedge::Minkowski4(y)) => {
            let mut r: f64 = 0.0;
            for i in 0..4 {
                r = r.max((x.a[i] - y.a[i]).abs());
                r = r.max((x.b[i] - y.b[i]).abs());
                r = r.max((x.base[i] - y.base[i]).abs());
            }
            r
        }
        _ => f64::INFINITY,
    };
    check(&mut checks, "geometry complement involution", inv_res, 1e-12);
    let chart = FRWChart::new(|t| t, 0.0, f64::INFINITY, 1.0).map_err(|e| anyhow!("{e}"))?;
    let edge = FrwEdge {
        t: std::f64::consts::E,
        base: [0.4, 0.0, -0.7],
        span: [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };
    let image = frw_edge_image(&edge, &chart).map_err(|e| anyhow!("{e}"))?;
    let back = frw_edge_from_image(&image, &chart).map_err(|e| anyhow!("{e}"))?;
    let rt = (back.t - edge.t).abs().max((image.tau - 1.0).abs());
    check(&mut checks, "frw edge round trip", rt, 1e-10);

    let pass = checks.iter().all(|c| c.pass);
    let failing: Vec<&str> =
        checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    let summary = serde_json::json!({
        "pass": pass,
        "seed": seed,
        "failing": failing,
        "checks": checks,
    });
    write_output(out, &(serde_json::to_string_pretty(&summary)? + "\n"))?;
    Ok(if pass { EXIT_PASS } else { EXIT_NUMERIC })
}

/// CAR fixed-point and vacuum-invariance reports over a kappa sweep.
pub fn cmd_car(cfg: &CarConfig, seed: u64, out: Option<&Path>) -> Result<i32> {
    if cfg.d < 2 || cfg.d > 6 {
        return Err(anyhow!("d must lie in 2..=6"));
    }
    let d = cfg.d;
    let mut p1 = vec![true; d];
    p1[d - 1] = false;
    let k_plus: Vec<i64> = (0..d as i64).map(|i| i + 1).collect();
    let k_minus: Vec<i64> = (0..d as i64).map(|i| 2 * i + 1).collect();
    let car = CarRep::new(d, &p1, &k_plus, &k_minus).map_err(|e| anyhow!("{e}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fminus: Vec<C64> = (0..d)
        .map(|_| C64::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0))
        .collect();
    let fplus: Vec<C64> = (0..d)
        .map(|_| C64::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0))
        .collect();
    let psi = car.psi(&fminus).map_err(|e| anyhow!("{e}"))?;
    let psid = car.psi_dagger(&fplus).map_err(|e| anyhow!("{e}"))?;

    let mut vacuum_rows = Vec::new();
    let mut worst: f64 = 0.0;
    for &kappa in &cfg.kappas {
        let res_minus = car.deformed_vacuum_check(&psi, -1, kappa).map_err(|e| anyhow!("{e}"))?;
        let res_plus = car.deformed_vacuum_check(&psid, 1, kappa).map_err(|e| anyhow!("{e}"))?;
        worst = worst.max(res_minus).max(res_plus);
        vacuum_rows.push(serde_json::json!({
            "kappa": kappa,
            "residual_cospinor": res_minus,
            "residual_spinor": res_plus,
        }));
    }

    // diagonal observable: a function of Q and K only
    let dim = car.dim();
    let mut diag = Array2::zeros((dim, dim));
    for a in 0..dim {
        diag[[a, a]] = C64::new((car.k_values[a] * car.q_values[a]) as f64, 0.0);
    }
    let fp_diag = car.fixed_point_derivative(&diag).map_err(|e| anyhow!("{e}"))?;
    // off-diagonal gauge-invariant observable with distinct boost values
    let obs = psi.dot(&psid);
    let fp_obs = car.fixed_point_derivative(&obs).map_err(|e| anyhow!("{e}"))?;

    let pass = worst < 1e-12 && fp_diag.derivative_norm < 1e-12 && fp_obs.derivative_norm > 1e-6;
    let report = serde_json::json!({
        "pass": pass,
        "seed": seed,
        "vacuum_invariance": vacuum_rows,
        "fixed_point": {
            "diagonal_observable_norm": fp_diag.derivative_norm,
            "offdiagonal_observable_norm": fp_obs.derivative_norm,
            "offdiagonal_commutator_norm": fp_obs.offzero_commutator_norm,
        },
    });
    write_output(out, &(serde_json::to_string_pretty(&report)? + "\n"))?;
    Ok(if pass { EXIT_PASS } else { EXIT_NUMERIC })
}
