//! Batch driver: configuration files, dotted overrides, and the JSON reports
//! of the `verify`, `spectrum`, `solve`, `overlap` and `norm` commands.

use std::fmt;
use std::path::Path;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bethe::{SpectralContext, VariableSet};
use crate::chain::{build_hamiltonian, structure_checks, ChainParams, HamiltonianRoute};
use crate::error::{Error, Result};
use crate::overlaps::{
    gaudin_matrix, lhospital_check, norm_check, normalized_overlap, one_site_reference, slavnov_check,
    slavnov_limit_check, Orientation,
};
use crate::solver::{
    classify_solutions, default_probes, match_spectrum, merge_solutions, solve_newton, solve_tq_fit, BetheSolution,
    SolverOptions,
};
use crate::states::{offshell_action_residuals, projection_expansion, raising_identity_residual, ChainOperators};
use crate::tensor::eigenvalues;
use crate::twist::{
    modified_diagonal_residual, vacuum_action_residuals, RhoBranch, TwistFactorization, TwistParams,
};

type C64 = Complex<f64>;

fn cz(z: [f64; 2]) -> C64 {
    Complex::new(z[0], z[1])
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub sites: usize,
    #[serde(default = "unit")]
    pub c: [f64; 2],
    /// Zeros of length `sites` when omitted.
    #[serde(default)]
    pub inhomogeneities: Option<Vec<[f64; 2]>>,
}

fn unit() -> [f64; 2] {
    [1.0, 0.0]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwistConfig {
    pub kappa_tilde: [f64; 2],
    pub kappa: [f64; 2],
    pub kappa_plus: [f64; 2],
    pub kappa_minus: [f64; 2],
    #[serde(default = "minus")]
    pub rho_branch: RhoBranch,
}

fn minus() -> RhoBranch {
    RhoBranch::Minus
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub max_iter: usize,
    pub tol: f64,
    pub starts: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = SolverOptions::default();
        Self {
            max_iter: d.max_iter,
            tol: d.tol,
            starts: d.starts,
            seed: d.seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// RTT, commutativity, invariance and exchange relations.
    pub structural: f64,
    /// Off-shell actions, the raising identity and the projection expansion.
    pub action: f64,
    pub hamiltonian: f64,
    /// Bethe residuals, relative to `max(1, |λ₁λ₂|)`.
    pub onshell: f64,
    /// Determinant formulas against direct contraction, and orthogonality.
    pub overlap: f64,
    /// Numerical limits (l'Hospital and coinciding-parameter limit).
    pub limit: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            structural: 1e-10,
            action: 1e-9,
            hamiltonian: 1e-8,
            onshell: 1e-8,
            overlap: 1e-8,
            limit: 1e-5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub chain: ChainConfig,
    pub twist: TwistConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Spectral parameters at which spectra are compared; three fixed points
    /// scaled by `c` when omitted.
    #[serde(default)]
    pub probes: Option<Vec<[f64; 2]>>,
    /// Random off-shell sets per solution in the `overlap` table.
    #[serde(default = "five")]
    pub samples: usize,
}

fn five() -> usize {
    5
}

fn invalid(field: &str, msg: impl fmt::Display) -> Error {
    Error::Config(format!("{field}: {msg}"))
}

fn finite(field: &str, z: [f64; 2]) -> Result<()> {
    if z.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(invalid(field, "must be finite"))
    }
}

impl RunConfig {
    /// Fills the defaulted lists and checks every invariant, naming the
    /// offending field.
    pub fn validate(mut self) -> Result<Self> {
        let n = self.chain.sites;
        if n == 0 {
            return Err(invalid("chain.sites", "must be at least 1"));
        }
        if n > 12 {
            return Err(invalid("chain.sites", "at most 12 sites fit the dense representation"));
        }
        finite("chain.c", self.chain.c)?;
        if cz(self.chain.c) == Complex::new(0.0, 0.0) {
            return Err(invalid("chain.c", "must be nonzero"));
        }
        let inh = self.chain.inhomogeneities.get_or_insert_with(|| vec![[0.0, 0.0]; n]);
        if inh.len() != n {
            return Err(invalid(
                "chain.inhomogeneities",
                format!("has length {}, expected chain.sites = {n}", inh.len()),
            ));
        }
        for (k, &z) in inh.iter().enumerate() {
            finite(&format!("chain.inhomogeneities.{k}"), z)?;
        }
        for (name, z) in [
            ("twist.kappa_tilde", self.twist.kappa_tilde),
            ("twist.kappa", self.twist.kappa),
            ("twist.kappa_plus", self.twist.kappa_plus),
            ("twist.kappa_minus", self.twist.kappa_minus),
        ] {
            finite(name, z)?;
        }
        if self.solver.starts == 0 {
            return Err(invalid("solver.starts", "must be at least 1"));
        }
        if self.solver.max_iter == 0 {
            return Err(invalid("solver.max_iter", "must be at least 1"));
        }
        let t = &self.tolerances;
        for (name, x) in [
            ("solver.tol", self.solver.tol),
            ("tolerances.structural", t.structural),
            ("tolerances.action", t.action),
            ("tolerances.hamiltonian", t.hamiltonian),
            ("tolerances.onshell", t.onshell),
            ("tolerances.overlap", t.overlap),
            ("tolerances.limit", t.limit),
        ] {
            if !(x.is_finite() && x > 0.0) {
                return Err(invalid(name, "must be positive and finite"));
            }
        }
        let c = cz(self.chain.c);
        let probes = self
            .probes
            .get_or_insert_with(|| default_probes(c).into_iter().map(pair).collect());
        if probes.is_empty() {
            return Err(invalid("probes", "must not be empty"));
        }
        for (k, &z) in probes.iter().enumerate() {
            finite(&format!("probes.{k}"), z)?;
        }
        Ok(self)
    }

    pub fn chain_params(&self) -> Result<ChainParams<f64>> {
        let inh = self
            .chain
            .inhomogeneities
            .as_deref()
            .map(|v| v.iter().copied().map(cz).collect())
            .unwrap_or_else(|| vec![Complex::new(0.0, 0.0); self.chain.sites]);
        ChainParams::new(self.chain.sites, cz(self.chain.c), inh)
    }

    pub fn twist_params(&self) -> TwistParams<f64> {
        let t = &self.twist;
        TwistParams::new(cz(t.kappa_tilde), cz(t.kappa), cz(t.kappa_plus), cz(t.kappa_minus))
    }

    pub fn context(&self) -> Result<SpectralContext<f64>> {
        let twist = TwistFactorization::new(&self.twist_params(), self.twist.rho_branch)?;
        Ok(SpectralContext::new(self.chain_params()?, twist))
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            starts: self.solver.starts,
            seed: self.solver.seed,
            max_iter: self.solver.max_iter,
            tol: self.solver.tol,
            ..SolverOptions::default()
        }
    }

    pub fn probe_points(&self) -> Vec<C64> {
        match &self.probes {
            Some(p) => p.iter().copied().map(cz).collect(),
            None => default_probes(cz(self.chain.c)),
        }
    }
}

/// Sets `path` (dot-separated, numeric segments index arrays) inside `root`.
/// The value is read as JSON, falling back to a plain string.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not of the form key=value")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(Error::Config(format!("override `{assignment}` has an empty key")));
    }
    let value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().to_string()));
    let mut node = root;
    let segments: Vec<&str> = key.split('.').collect();
    for (depth, seg) in segments.iter().enumerate() {
        let last = depth + 1 == segments.len();
        node = match node {
            Value::Array(items) => {
                let idx: usize = seg
                    .parse()
                    .map_err(|_| Error::Config(format!("override `{key}`: `{seg}` is not an array index")))?;
                items
                    .get_mut(idx)
                    .ok_or_else(|| Error::Config(format!("override `{key}`: index {idx} out of range")))?
            }
            Value::Object(map) => map.entry(seg.to_string()).or_insert_with(|| {
                if last {
                    Value::Null
                } else {
                    Value::Object(Default::default())
                }
            }),
            _ => return Err(Error::Config(format!("override `{key}`: `{seg}` is inside a scalar"))),
        };
    }
    *node = value;
    Ok(())
}

/// Parses a JSON configuration, applies the overrides in order and validates.
pub fn parse_config_str(text: &str, overrides: &[String]) -> Result<RunConfig> {
    let mut root: Value = serde_json::from_str(text)
        .map_err(|e| Error::Config(format!("malformed JSON at line {} column {}: {e}", e.line(), e.column())))?;
    for o in overrides {
        apply_override(&mut root, o)?;
    }
    let cfg: RunConfig = serde_json::from_value(root).map_err(|e| Error::Config(e.to_string()))?;
    cfg.validate()
}

pub fn parse_config(path: &Path, overrides: &[String]) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&text, overrides).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Verify,
    Spectrum,
    Solve,
    Overlap,
    Norm,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Verify => "verify",
            Command::Spectrum => "spectrum",
            Command::Solve => "solve",
            Command::Overlap => "overlap",
            Command::Norm => "norm",
        })
    }
}

/// Rounds to 15 significant digits.
pub fn round15(x: f64) -> f64 {
    if x.is_finite() {
        format!("{x:.14e}").parse().unwrap_or(x)
    } else {
        x
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// `None` when the residual is not finite or the computation failed.
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Check {
    pub fn from_result(name: impl Into<String>, value: Result<f64>, tolerance: f64) -> Self {
        match value {
            Ok(r) => Check {
                name: name.into(),
                residual: r.is_finite().then(|| round15(r)),
                tolerance,
                pass: r.is_finite() && r <= tolerance,
                error: None,
            },
            Err(e) => Check {
                name: name.into(),
                residual: None,
                tolerance,
                pass: false,
                error: Some(e.to_string()),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolutionRow {
    pub roots: Vec<[f64; 2]>,
    pub residuals: Vec<f64>,
    pub onshell: bool,
    pub flagged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_residual: Option<f64>,
    /// `Λ(u, ū)` at the probe points.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigenvalues: Option<Vec<[f64; 2]>>,
}

impl SolutionRow {
    fn new(s: &BetheSolution<f64>) -> Self {
        Self {
            roots: s.roots.iter().copied().map(pair).collect(),
            residuals: s.residuals.iter().map(|&r| round15(r)).collect(),
            onshell: s.onshell,
            flagged: s.flagged,
            fit_residual: s.fit_residual.map(round15),
            eigenvalues: s.matched_eigenvalue.as_ref().map(|v| v.iter().copied().map(pair).collect()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub probe: [f64; 2],
    pub eigenvalues: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveTable {
    pub newton: Vec<SolutionRow>,
    pub tq_fit: Vec<SolutionRow>,
    pub matched_pairs: usize,
    pub joint: Vec<SolutionRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OverlapRow {
    pub solution: usize,
    pub sample: usize,
    pub orientation: Orientation,
    pub off_shell: Vec<[f64; 2]>,
    pub direct: [f64; 2],
    pub formula: [f64; 2],
    pub relative_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrthogonalityRow {
    pub left: usize,
    pub right: usize,
    pub normalized_overlap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormRow {
    pub solution: usize,
    pub roots: Vec<[f64; 2]>,
    pub direct: [f64; 2],
    pub formula: [f64; 2],
    pub relative_error: f64,
    pub gaudin_matrix: Vec<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub command: Command,
    pub config: RunConfig,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<Vec<SpectrumRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solutions: Option<SolveTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub overlaps: Option<Vec<OverlapRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orthogonality: Option<Vec<OrthogonalityRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norms: Option<Vec<NormRow>>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl RunReport {
    fn new(command: Command, config: &RunConfig) -> Self {
        Self {
            command,
            config: config.clone(),
            checks: Vec::new(),
            spectrum: None,
            solutions: None,
            overlaps: None,
            orthogonality: None,
            norms: None,
            passed: true,
            wall_time_s: None,
        }
    }

    fn check(&mut self, name: impl Into<String>, value: Result<f64>, tolerance: f64) {
        self.checks.push(Check::from_result(name, value, tolerance));
    }

    fn finish(mut self) -> Self {
        self.passed = self.checks.iter().all(|c| c.pass);
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }
}

fn draw(rng: &mut ChaCha8Rng, scale: f64) -> C64 {
    Complex::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
}

fn draws(rng: &mut ChaCha8Rng, ctx: &SpectralContext<f64>, m: usize, scale: f64) -> Result<VariableSet<f64>> {
    ctx.variables((0..m).map(|_| draw(rng, scale)).collect())
}

fn max_of(values: impl IntoIterator<Item = Result<f64>>) -> Result<f64> {
    values.into_iter().try_fold(0.0f64, |m, r| r.map(|x| m.max(x)))
}

fn frobenius_residual(a: &crate::tensor::CMatrix<f64>, b: &crate::tensor::CMatrix<f64>) -> f64 {
    (a - b).frobenius_norm() / a.frobenius_norm().max(1.0)
}

/// Runs `command` and collects every check; module errors become failing
/// checks rather than aborting the run.
pub fn execute(command: Command, cfg: &RunConfig) -> Result<RunReport> {
    let ctx = cfg.context()?;
    let report = RunReport::new(command, cfg);
    let report = match command {
        Command::Verify => verify(cfg, &ctx, report)?,
        Command::Spectrum => spectrum(cfg, &ctx, report)?,
        Command::Solve => solve(cfg, &ctx, report)?.0,
        Command::Overlap => overlap(cfg, &ctx, report)?,
        Command::Norm => norm(cfg, &ctx, report)?,
    };
    Ok(report.finish())
}

fn rng_for(cfg: &RunConfig, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.solver.seed);
    rng.set_stream(stream);
    rng
}

fn verify(cfg: &RunConfig, ctx: &SpectralContext<f64>, mut report: RunReport) -> Result<RunReport> {
    let tol = &cfg.tolerances;
    let n = ctx.sites();
    let mut rng = rng_for(cfg, 1);
    let scale = ctx.c().norm();
    let u = draw(&mut rng, scale);
    let v = draw(&mut rng, scale);
    let k = cfg.twist_params();
    match structure_checks(&ctx.chain, &k, u, v) {
        Ok(s) => {
            for (name, r) in s.entries() {
                report.check(name, Ok(r), tol.structural);
            }
        }
        Err(e) => report.check("structure", Err(e), tol.structural),
    }
    let ops = match ChainOperators::new(ctx) {
        Ok(ops) => ops,
        Err(e) => {
            report.check("modified_operators", Err(e), tol.structural);
            return Ok(report);
        }
    };
    report.check(
        "modified_diagonal",
        Ok(modified_diagonal_residual(&ops.nu, &ctx.twist, &ops.transfer, u)),
        tol.structural,
    );
    let vac = vacuum_action_residuals(&ops.nu, &ctx.twist, &ctx.chain, u);
    report.check("vacuum_nu11", Ok(vac.nu11), tol.structural);
    report.check("vacuum_nu22", Ok(vac.nu22), tol.structural);
    report.check("vacuum_nu21", Ok(vac.nu21), tol.structural);

    let mut actions = [0.0f64; 5];
    let mut action_error = None;
    let mut projection = Ok(0.0f64);
    for m in 0..=n {
        let result = draws(&mut rng, ctx, m, scale).and_then(|set| {
            let a = offshell_action_residuals(&ops, ctx, u, &set)?;
            if n <= 4 {
                let p = projection_expansion(&ops, ctx, &set)?;
                let w0 = p.w0_difference.unwrap_or(0.0);
                projection = projection.clone().map(|x| x.max(p.ket_residual).max(p.dual_residual).max(w0));
            }
            Ok(a)
        });
        match result {
            Ok(a) => {
                for (slot, (_, r)) in actions.iter_mut().zip(a.entries()) {
                    *slot = slot.max(r);
                }
            }
            Err(e) => action_error = Some(e),
        }
    }
    let names = ["action_nu12", "action_nu11", "action_nu22", "action_nu21", "action_transfer"];
    for (name, r) in names.iter().zip(actions) {
        let value = match &action_error {
            Some(e) => Err(e.clone()),
            None => Ok(r),
        };
        report.check(*name, value, tol.action);
    }
    if n <= 4 {
        report.check("projection_expansion", projection, tol.action);
    }
    let raising = draws(&mut rng, ctx, n, scale).and_then(|set| raising_identity_residual(&ops, ctx, u, &set));
    report.check("raising_identity", raising, tol.action);
    if ctx.chain.is_homogeneous() && n >= 2 {
        let h = build_hamiltonian(&ctx.chain, &k, HamiltonianRoute::Direct).and_then(|direct| {
            let via = build_hamiltonian(&ctx.chain, &k, HamiltonianRoute::Transfer)?;
            Ok(frobenius_residual(&direct, &via))
        });
        report.check("hamiltonian_routes", h, tol.hamiltonian);
    }
    Ok(report)
}

fn sorted_spectrum(mut values: Vec<C64>) -> Vec<C64> {
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    values
}

fn spectrum(cfg: &RunConfig, ctx: &SpectralContext<f64>, mut report: RunReport) -> Result<RunReport> {
    let ops = ChainOperators::new(ctx)?;
    let mut rows = Vec::new();
    for p in cfg.probe_points() {
        match eigenvalues(&ops.transfer.eval(p)) {
            Ok(ev) => rows.push(SpectrumRow {
                probe: pair(p),
                eigenvalues: sorted_spectrum(ev).into_iter().map(pair).collect(),
            }),
            Err(e) => report.check(format!("eigenvalues_at_{}_{}", p.re, p.im), Err(e), 0.0),
        }
    }
    report.spectrum = Some(rows);
    Ok(report)
}

/// Both solvers, their comparison and the joint solution list.
fn solve(
    cfg: &RunConfig,
    ctx: &SpectralContext<f64>,
    mut report: RunReport,
) -> Result<(RunReport, Vec<BetheSolution<f64>>)> {
    let opts = cfg.solver_options();
    let probes = cfg.probe_points();
    let ops = ChainOperators::new(ctx)?;
    let newton = solve_newton(ctx, &opts);
    let fit = match solve_tq_fit(ctx, &ops.transfer, &opts) {
        Ok(f) => f,
        Err(e) => {
            report.check("tq_fit", Err(e), cfg.tolerances.onshell);
            Vec::new()
        }
    };
    let classes = classify_solutions(ctx, &newton, &fit, &probes, opts.dedup);
    let newton_rows = newton.iter().map(SolutionRow::new).collect();
    let fit_rows = fit.iter().map(SolutionRow::new).collect();
    let mut joint: Vec<BetheSolution<f64>> = merge_solutions(newton, fit, opts.dedup)
        .into_iter()
        .filter(|s| s.onshell)
        .collect();
    let expected = 1usize << ctx.sites();
    report.check(
        "solution_count",
        Ok((joint.len() as f64 - expected as f64).abs()),
        0.0,
    );
    let worst = joint.iter().fold(0.0f64, |m, s| m.max(s.max_residual() / ctx.residual_scale(&s.roots)));
    report.check("bethe_residuals", Ok(worst), cfg.tolerances.onshell);
    let matched = match_spectrum(ctx, &ops.transfer, &mut joint, &probes).map(|m| {
        if m.unmatched_eigenvalues == 0 && m.solutions == m.spectrum_size {
            m.max_relative_gap
        } else {
            f64::INFINITY
        }
    });
    report.check("spectrum_match", matched, cfg.tolerances.onshell);
    report.solutions = Some(SolveTable {
        newton: newton_rows,
        tq_fit: fit_rows,
        matched_pairs: classes.pairs.len(),
        joint: joint.iter().map(SolutionRow::new).collect(),
    });
    Ok((report, joint))
}

fn solved(cfg: &RunConfig, ctx: &SpectralContext<f64>) -> Result<Vec<BetheSolution<f64>>> {
    let report = RunReport::new(Command::Solve, cfg);
    Ok(solve(cfg, ctx, report)?.1)
}

fn overlap(cfg: &RunConfig, ctx: &SpectralContext<f64>, mut report: RunReport) -> Result<RunReport> {
    let ops = ChainOperators::new(ctx)?;
    let sols = solved(cfg, ctx)?;
    let tol = &cfg.tolerances;
    let mut rng = rng_for(cfg, 2);
    let scale = ctx.c().norm() * 1.5;
    let mut rows = Vec::new();
    let mut worst = [Ok(0.0f64), Ok(0.0f64)];
    for (si, sol) in sols.iter().enumerate() {
        for sample in 0..cfg.samples {
            let off = match draws(&mut rng, ctx, ctx.sites(), scale) {
                Ok(v) => v,
                Err(e) => {
                    worst[0] = Err(e);
                    continue;
                }
            };
            for (slot, orientation) in [Orientation::UOnshell, Orientation::VOnshell].into_iter().enumerate() {
                let (u, v) = match orientation {
                    Orientation::UOnshell => (&sol.roots, &off),
                    _ => (&off, &sol.roots),
                };
                match slavnov_check(ctx, &ops, u, v, orientation, tol.onshell) {
                    Ok(r) => {
                        worst[slot] = worst[slot].clone().map(|w| w.max(r.relative_error));
                        rows.push(OverlapRow {
                            solution: si,
                            sample,
                            orientation,
                            off_shell: off.iter().copied().map(pair).collect(),
                            direct: pair(r.direct),
                            formula: pair(r.formula),
                            relative_error: round15(r.relative_error),
                        });
                    }
                    Err(e) => worst[slot] = Err(e),
                }
            }
        }
    }
    let [wu, wv] = worst;
    report.check("slavnov_u_onshell", wu, tol.overlap);
    report.check("slavnov_v_onshell", wv, tol.overlap);
    let mut ortho = Vec::new();
    for i in 0..sols.len() {
        for j in 0..sols.len() {
            if i != j {
                ortho.push(OrthogonalityRow {
                    left: i,
                    right: j,
                    normalized_overlap: round15(normalized_overlap(&ops, &sols[i].roots, &sols[j].roots)),
                });
            }
        }
    }
    let worst_ortho = ortho.iter().fold(0.0f64, |m, r| m.max(r.normalized_overlap));
    report.check("orthogonality", Ok(worst_ortho), tol.overlap);
    if ctx.sites() == 1 {
        let u = draw(&mut rng, scale);
        let v = draw(&mut rng, scale);
        let generic = one_site_reference(ctx, &ops, u, v, tol.onshell);
        report.check(
            "one_site_parametrization",
            generic.clone().map(|r| r.parametrization_error),
            tol.overlap,
        );
        report.check("one_site_alternative", generic.map(|r| r.alternative_error), tol.overlap);
        let onshell = max_of(sols.iter().map(|s| {
            let r = one_site_reference(ctx, &ops, u, s.roots.get(0), tol.onshell)?;
            r.onshell_error
                .ok_or(Error::NotOnShell { max_residual: f64::NAN, tolerance: tol.onshell })
        }));
        report.check("one_site_onshell_form", onshell, tol.overlap);
    }
    report.overlaps = Some(rows);
    report.orthogonality = Some(ortho);
    Ok(report)
}

fn norm(cfg: &RunConfig, ctx: &SpectralContext<f64>, mut report: RunReport) -> Result<RunReport> {
    let ops = ChainOperators::new(ctx)?;
    let sols = solved(cfg, ctx)?;
    let tol = &cfg.tolerances;
    let mut rows = Vec::new();
    let mut worst = Ok(0.0f64);
    for (si, sol) in sols.iter().enumerate() {
        let row = norm_check(ctx, &ops, &sol.roots, tol.onshell).and_then(|r| {
            let gm = gaudin_matrix(ctx, &sol.roots)?;
            let matrix = (0..gm.rows())
                .map(|i| gm.row(i).iter().copied().map(pair).collect())
                .collect();
            Ok((r, matrix))
        });
        match row {
            Ok((r, gaudin)) => {
                worst = worst.map(|w: f64| w.max(r.relative_error));
                rows.push(NormRow {
                    solution: si,
                    roots: sol.roots.iter().copied().map(pair).collect(),
                    direct: pair(r.direct),
                    formula: pair(r.formula),
                    relative_error: round15(r.relative_error),
                    gaudin_matrix: gaudin,
                });
            }
            Err(e) => worst = Err(e),
        }
    }
    report.check("gaudin_norm", worst, tol.overlap);
    report.check(
        "lhospital_limit",
        max_of(sols.iter().map(|s| lhospital_check(ctx, &s.roots))),
        tol.limit,
    );
    report.check(
        "slavnov_norm_limit",
        max_of(sols.iter().map(|s| slavnov_limit_check(ctx, &s.roots, 1e-5))),
        tol.limit,
    );
    report.norms = Some(rows);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CONFIG_A: &str = r#"{
        "chain": {"sites": 1, "c": [1, 0]},
        "twist": {"kappa_tilde": [2, 0], "kappa": [1, 0], "kappa_plus": [1, 0], "kappa_minus": [1, 0]}
    }"#;

    #[test]
    fn defaults_are_filled() {
        let cfg = parse_config_str(CONFIG_A, &[]).unwrap();
        assert_eq!(cfg.solver.starts, 200);
        assert_eq!(cfg.solver.tol, 1e-8);
        assert_eq!(cfg.tolerances.structural, 1e-10);
        assert_eq!(cfg.tolerances.onshell, 1e-8);
        assert_eq!(cfg.chain.inhomogeneities, Some(vec![[0.0, 0.0]]));
        assert_eq!(cfg.twist.rho_branch, RhoBranch::Minus);
        assert_eq!(cfg.probes.as_ref().map(Vec::len), Some(3));
    }

    #[test]
    fn overrides_use_dotted_keys() {
        let mut v: Value = serde_json::from_str(CONFIG_A).unwrap();
        apply_override(&mut v, "solver.seed=7").unwrap();
        apply_override(&mut v, "chain.c.1=0.5").unwrap();
        apply_override(&mut v, "twist.rho_branch=plus").unwrap();
        assert_eq!(v["solver"]["seed"], 7);
        assert_eq!(v["chain"]["c"][1], 0.5);
        assert_eq!(v["twist"]["rho_branch"], "plus");
        assert!(apply_override(&mut v, "chain.c.5=1").is_err());
        assert!(apply_override(&mut v, "noequals").is_err());
    }

    #[test]
    fn validation_names_the_field() {
        let text = r#"{
            "chain": {"sites": 1, "inhomogeneities": [[0, 0]]},
            "twist": {"kappa_tilde": [2, 0], "kappa": [1, 0], "kappa_plus": [1, 0], "kappa_minus": [1, 0]}
        }"#;
        let err = parse_config_str(text, &["chain.sites=2".into()]).unwrap_err().to_string();
        assert!(err.contains("chain.inhomogeneities"), "{err}");
        let err = parse_config_str(CONFIG_A, &["chain.c=[0,0]".into()]).unwrap_err().to_string();
        assert!(err.contains("chain.c"), "{err}");
        let err = parse_config_str(CONFIG_A, &["chain.sites=0".into()]).unwrap_err().to_string();
        assert!(err.contains("chain.sites"), "{err}");
        let err = parse_config_str("{\"chain\": ", &[]).unwrap_err().to_string();
        assert!(err.contains("line 1"), "{err}");
        let err = parse_config_str(CONFIG_A, &["chain.colour=1".into()]).unwrap_err().to_string();
        assert!(err.contains("colour"), "{err}");
    }

    #[test]
    fn plus_branch_is_plumbed() {
        let minus = parse_config_str(CONFIG_A, &[]).unwrap().context().unwrap();
        let plus = parse_config_str(CONFIG_A, &["twist.rho_branch=plus".into()])
            .unwrap()
            .context()
            .unwrap();
        assert!((minus.rho() + plus.rho() - Complex::new(3.0, 0.0)).norm() < 1e-12);
        assert!(plus.rho().norm() > minus.rho().norm());
    }

    #[test]
    fn residuals_keep_fifteen_digits() {
        assert_eq!(round15(0.1234567890123456789), 0.123456789012346);
        assert_eq!(round15(1.0), 1.0);
        assert!(round15(f64::NAN).is_nan());
    }

    #[test]
    fn config_a_commands_pass() {
        let cfg = parse_config_str(CONFIG_A, &[]).unwrap();
        for cmd in [Command::Verify, Command::Spectrum, Command::Solve, Command::Overlap, Command::Norm] {
            let r = execute(cmd, &cfg).unwrap();
            assert!(r.passed, "{cmd}: {:?}", r.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>());
        }
        let r = execute(Command::Norm, &cfg).unwrap();
        let rows = r.norms.unwrap();
        assert_eq!(rows.len(), 2);
        let anchor = rows.iter().find(|r| (r.roots[0][0] - 1.618034).abs() < 1e-6).unwrap();
        assert!((anchor.formula[0] - 4.959675).abs() < 1e-6);
    }

    #[test]
    fn reports_are_deterministic() {
        let cfg = parse_config_str(CONFIG_A, &["chain.sites=2".into(), "chain.inhomogeneities=[[0.1,0],[-0.1,0]]".into()])
            .unwrap();
        let a = execute(Command::Overlap, &cfg).unwrap().to_json();
        let b = execute(Command::Overlap, &cfg).unwrap().to_json();
        assert_eq!(a, b);
    }
}
