//! Scenario runner: ingests a JSON scenario describing events, free-field
//! profiles and celestial data, executes the requested identity checks in
//! order, and emits a deterministic JSON report plus optional plot-ready
//! column files.
//!
//! Exit codes: 0 all checks pass, 1 any residual failure, 2 input error.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use nullinf_core::asymptotics::{
    assemble_scattering, extract_null_asymptote, fourier_profile, kirchhoff_eval,
    matching_verify, r_schedule, FreeFieldData,
};
use nullinf_core::celestial::{Homogeneous, NullDirection};
use nullinf_core::currents::{current_profile, PointParticle, ScatteringEvent, Transition};
use nullinf_core::numerics::sphere::SphereQuadrature;
use nullinf_core::numerics::sphharm::{coeff_index, SphereBasis};
use nullinf_core::staruszkiewicz::{casimir, charge_decompose, weyl_compose, StarWeylElement};
use nullinf_core::sympquant::{ir_divergence_scan, symp_null};
use nullinf_core::vec4::{Vec4, ETA};

#[derive(Parser)]
#[command(name = "nullinf", version, about = "Null-infinity electrodynamics scenario runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the checks requested by a scenario file.
    Run {
        scenario: PathBuf,
        /// Write the JSON report here (defaults to stdout only).
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write every plot series in the report to this directory.
        #[arg(long)]
        plot_dir: Option<PathBuf>,
        /// Override the scenario's sphere-quadrature order.
        #[arg(long)]
        order: Option<usize>,
        /// Multiply every check tolerance by this factor.
        #[arg(long)]
        tolerance_scale: Option<f64>,
    },
    /// Extract one plot series from a report as whitespace-separated columns.
    Plot {
        report: PathBuf,
        selection: String,
        /// Output file (defaults to stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

// ---------------------------------------------------------------------------
// Scenario schema
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Scenario {
    version: u32,
    /// sphere quadrature order for all checks
    #[serde(default = "default_order")]
    order: usize,
    #[serde(default = "default_one")]
    tolerance_scale: f64,
    /// deterministic sampling offset
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    events: BTreeMap<String, EventSpec>,
    #[serde(default)]
    profiles: BTreeMap<String, ProfileSpec>,
    #[serde(default)]
    star_data: BTreeMap<String, StarSpec>,
    #[serde(default)]
    checks: Vec<CheckSpec>,
}

fn default_order() -> usize {
    16
}
fn default_one() -> f64 {
    1.0
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EventSpec {
    incoming: Vec<ParticleSpec>,
    outgoing: Vec<ParticleSpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ParticleSpec {
    charge: f64,
    /// 3-velocity; the unit four-velocity is (1, β)/√(1 − β²)
    beta: [f64; 3],
}

/// Free-field null data: an analytic family (sech pulse or step) with its
/// parameters.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileSpec {
    family: String,
    amplitude: [f64; 3],
    #[serde(default)]
    center: f64,
    #[serde(default = "default_one")]
    width: f64,
}

/// Celestial data (D, c) as spherical-harmonic coefficient lists (ℓ, m,
/// value) on the canonical section; the (0,0) coefficient of c fixes the
/// charge Q = c₀₀/√(4π), which must lie in eℤ.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StarSpec {
    #[serde(default)]
    d: Vec<(usize, i32, f64)>,
    #[serde(default)]
    c: Vec<(usize, i32, f64)>,
    #[serde(default = "default_one")]
    e: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, tag = "check", rename_all = "snake_case")]
enum CheckSpec {
    /// l·V^J(s,l) = Q at deterministic (s, l) samples.
    GaussConstraint {
        event: String,
        #[serde(default = "default_samples")]
        samples: usize,
        tolerance: f64,
    },
    /// Matching identities of the assembled (V, V′, V^J) triple.
    MatchingVerify {
        event: String,
        profile: String,
        tolerance: f64,
    },
    /// Antisymmetry of the null-data symplectic form.
    NullFormAntisymmetry {
        profiles: [String; 2],
        #[serde(default = "default_s_max")]
        s_max: f64,
        tolerance: f64,
    },
    /// Truncated-product log slope vs the zero-frequency mode integral.
    IrScan {
        profile: String,
        /// relative tolerance on the slope
        tolerance: f64,
    },
    /// Radius extrapolation of R·A recovers the null data.
    NullExtrapolation {
        profile: String,
        #[serde(default = "default_direction")]
        direction: [f64; 3],
        #[serde(default = "default_radius_count")]
        count: usize,
        tolerance: f64,
    },
    /// Charge decomposition round trip in a boosted frame.
    ChargeRoundTrip {
        star: String,
        #[serde(default)]
        beta: [f64; 3],
        #[serde(default = "default_lmax")]
        lmax: usize,
        tolerance: f64,
    },
    /// Associativity of the Weyl composition phase on a triple.
    WeylCocycle {
        stars: [String; 3],
        tolerance: f64,
    },
    /// Casimir eigenvalue and supplementary parameter at coupling z < 1.
    CasimirValue {
        z: f64,
        expected_value: f64,
        expected_nu: f64,
        tolerance: f64,
    },
}

fn default_samples() -> usize {
    1000
}
fn default_s_max() -> f64 {
    12.0
}
fn default_direction() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}
fn default_radius_count() -> usize {
    10
}
fn default_lmax() -> usize {
    24
}

// ---------------------------------------------------------------------------
// Report schema
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct Report {
    tool_version: String,
    scenario_version: u32,
    order: usize,
    tolerance_scale: f64,
    rows: Vec<CheckRow>,
    series: BTreeMap<String, Series>,
}

#[derive(Serialize, Deserialize)]
struct CheckRow {
    name: String,
    lhs: f64,
    rhs: f64,
    residual: f64,
    tolerance: f64,
    pass: bool,
}

#[derive(Serialize, Deserialize)]
struct Series {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

// ---------------------------------------------------------------------------
// Scenario → core objects
// ---------------------------------------------------------------------------

fn build_event(spec: &EventSpec, path: &str) -> Result<ScatteringEvent> {
    let side = |parts: &[ParticleSpec], side: &str| -> Result<Vec<PointParticle>> {
        parts
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let b2: f64 = p.beta.iter().map(|c| c * c).sum();
                if b2 >= 1.0 {
                    bail!("{path}.{side}[{i}].beta: |β| must be < 1");
                }
                let g = 1.0 / (1.0 - b2).sqrt();
                let u = Vec4::new(g, g * p.beta[0], g * p.beta[1], g * p.beta[2]);
                PointParticle::new(p.charge, u)
                    .map_err(|e| anyhow!("{path}.{side}[{i}]: {e}"))
            })
            .collect()
    };
    ScatteringEvent::new(
        side(&spec.incoming, "incoming")?,
        side(&spec.outgoing, "outgoing")?,
        Transition::default_step(),
    )
    .map_err(|e| anyhow!("{path}: {e}"))
}

fn build_profile(spec: &ProfileSpec, path: &str) -> Result<FreeFieldData> {
    let made = match spec.family.as_str() {
        "sech" => FreeFieldData::mode_sech(spec.amplitude, spec.center, spec.width, None),
        "step" => FreeFieldData::mode_step(spec.amplitude, spec.center, spec.width, None),
        other => bail!("{path}.family: unknown family '{other}' (expected 'sech' or 'step')"),
    };
    made.map_err(|e| anyhow!("{path}: {e}"))
}

/// Homogeneous function of the given degree from (ℓ, m, value) coefficients
/// on the canonical section.
fn harmonic_fn(coeffs: &[(usize, i32, f64)], degree: i32, path: &str) -> Result<Homogeneous> {
    let lmax = coeffs.iter().map(|(l, _, _)| *l).max().unwrap_or(0);
    let mut dense = vec![0.0; (lmax + 1) * (lmax + 1)];
    for (i, (l, m, v)) in coeffs.iter().enumerate() {
        if m.unsigned_abs() as usize > *l {
            bail!("{path}[{i}]: |m| = {} exceeds ℓ = {l}", m.unsigned_abs());
        }
        dense[coeff_index(*l, *m)] += v;
    }
    let basis = Arc::new(SphereBasis::new(
        SphereQuadrature::new(lmax.max(2) + 2).map_err(|e| anyhow!("{path}: {e}"))?,
        lmax,
    ));
    Ok(Homogeneous::new(degree, move |n: [f64; 3]| {
        basis.synth(&dense, n)
    }))
}

struct Context_ {
    quad: SphereQuadrature,
    tolerance_scale: f64,
    seed: u64,
}

fn lookup<'a, T>(map: &'a BTreeMap<String, T>, key: &str, kind: &str, path: &str) -> Result<&'a T> {
    map.get(key)
        .ok_or_else(|| anyhow!("{path}: {kind} '{key}' is not defined"))
}

fn frac(x: f64) -> f64 {
    x - x.floor()
}

// ---------------------------------------------------------------------------
// Check execution
// ---------------------------------------------------------------------------

fn run_check(
    spec: &CheckSpec,
    idx: usize,
    scenario: &Scenario,
    ctx: &Context_,
    series: &mut BTreeMap<String, Series>,
) -> Result<CheckRow> {
    let path = format!("checks[{idx}]");
    let row = |name: &str, lhs: f64, rhs: f64, residual: f64, tol: f64| CheckRow {
        name: name.into(),
        lhs,
        rhs,
        residual,
        tolerance: tol * ctx.tolerance_scale,
        pass: residual < tol * ctx.tolerance_scale,
    };
    match spec {
        CheckSpec::GaussConstraint {
            event,
            samples,
            tolerance,
        } => {
            let ev = build_event(
                lookup(&scenario.events, event, "event", &path)?,
                &format!("events.{event}"),
            )?;
            let vj = current_profile(&ev);
            let q = ev.total_charge();
            // golden-angle sphere spiral × low-discrepancy s values
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            let off = frac(ctx.seed as f64 * 0.6180339887498949);
            let mut worst = 0.0_f64;
            for i in 0..*samples {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / *samples as f64;
                let rho = (1.0 - z * z).sqrt();
                let phi = golden * i as f64;
                let dir = NullDirection::new([rho * phi.cos(), rho * phi.sin(), z]);
                let s = -10.0 + 20.0 * frac(i as f64 * std::f64::consts::SQRT_2 + off);
                worst = worst.max((dir.l().dot(&vj.v(s, &dir)) - q).abs());
            }
            Ok(row("gauss_constraint", worst + q, q, worst, *tolerance))
        }
        CheckSpec::MatchingVerify {
            event,
            profile,
            tolerance,
        } => {
            let ev = build_event(
                lookup(&scenario.events, event, "event", &path)?,
                &format!("events.{event}"),
            )?;
            let data = build_profile(
                lookup(&scenario.profiles, profile, "profile", &path)?,
                &format!("profiles.{profile}"),
            )?;
            let triple = assemble_scattering(&ev, &data)?;
            let s_samples: Vec<f64> = (-8..=8).map(|k| k as f64).collect();
            let rep = matching_verify(&triple.v, &triple.v_prime, &triple.vj, &ctx.quad, &s_samples)?;
            Ok(row("matching_verify", rep.max(), 0.0, rep.max(), *tolerance))
        }
        CheckSpec::NullFormAntisymmetry {
            profiles,
            s_max,
            tolerance,
        } => {
            let a = build_profile(
                lookup(&scenario.profiles, &profiles[0], "profile", &path)?,
                &format!("profiles.{}", profiles[0]),
            )?;
            let b = build_profile(
                lookup(&scenario.profiles, &profiles[1], "profile", &path)?,
                &format!("profiles.{}", profiles[1]),
            )?;
            let ab = symp_null(&a.profile, &b.profile, &ctx.quad, *s_max)?;
            let ba = symp_null(&b.profile, &a.profile, &ctx.quad, *s_max)?;
            Ok(row("null_form_antisymmetry", ab, -ba, (ab + ba).abs(), *tolerance))
        }
        CheckSpec::IrScan { profile, tolerance } => {
            let data = build_profile(
                lookup(&scenario.profiles, profile, "profile", &path)?,
                &format!("profiles.{profile}"),
            )?;
            let fp = fourier_profile(&data, &[-1.0, 0.0, 1.0], 30.0, 400)?;
            let mins: Vec<f64> = (0..6).map(|k| 1e-3 / 2f64.powi(k)).collect();
            let scan = ir_divergence_scan(&fp, &ctx.quad, &mins, 30.0, 300)?;
            // slope target: −∫ conj(Ṽ̇(0⁺))·Ṽ̇(0⁺) d²l (Minkowski square)
            let mut target = 0.0;
            for (n, w) in ctx.quad.nodes.iter().zip(&ctx.quad.weights) {
                let z = fp.zero_plus(&NullDirection::new(*n));
                let sq: f64 = (0..4).map(|c| ETA[c] * z[c].norm_sqr()).sum();
                target -= w * sq;
            }
            series.insert(
                "ir_scan".into(),
                Series {
                    columns: vec!["ln_inv_omega_min".into(), "value".into()],
                    rows: scan.points.iter().map(|(x, y)| vec![*x, *y]).collect(),
                },
            );
            let residual = (scan.slope - target).abs() / target.abs().max(1e-300);
            Ok(row("ir_scan", scan.slope, target, residual, *tolerance))
        }
        CheckSpec::NullExtrapolation {
            profile,
            direction,
            count,
            tolerance,
        } => {
            let data = build_profile(
                lookup(&scenario.profiles, profile, "profile", &path)?,
                &format!("profiles.{profile}"),
            )?;
            let norm: f64 = direction.iter().map(|c| c * c).sum::<f64>().sqrt();
            if norm < 1e-12 {
                bail!("{path}.direction: must be nonzero");
            }
            let dir = NullDirection::new([
                direction[0] / norm,
                direction[1] / norm,
                direction[2] / norm,
            ]);
            let radii = r_schedule(4.0, *count);
            let sampler = |x: &Vec4| kirchhoff_eval(&data, x, &ctx.quad);
            let origin = Vec4::ZERO;
            let asym = extract_null_asymptote(&sampler, &origin, &dir, 1.0, &radii, 1e-3)?;
            let expect = data.profile.v(0.0, &dir);
            // trace R·A(R·l) for the plot, on the largest-|V| component
            let comp = (0..4)
                .max_by(|a, b| expect[*a].abs().partial_cmp(&expect[*b].abs()).unwrap())
                .unwrap();
            let l = dir.l();
            let rows: Vec<Vec<f64>> = radii
                .iter()
                .map(|r| {
                    let (a, _) = sampler(&l.scale(*r));
                    vec![*r, r * a[comp]]
                })
                .collect();
            series.insert(
                "null_extrapolation".into(),
                Series {
                    columns: vec!["radius".into(), format!("r_times_a{comp}")],
                    rows,
                },
            );
            let residual = (asym.v - expect).euclid_norm();
            Ok(row(
                "null_extrapolation",
                asym.v[comp],
                expect[comp],
                residual,
                *tolerance,
            ))
        }
        CheckSpec::ChargeRoundTrip {
            star,
            beta,
            lmax,
            tolerance,
        } => {
            let spec = lookup(&scenario.star_data, star, "star data", &path)?;
            let c = harmonic_fn(&spec.c, -2, &format!("star_data.{star}.c"))?;
            let b2: f64 = beta.iter().map(|c| c * c).sum();
            if b2 >= 1.0 {
                bail!("{path}.beta: |β| must be < 1");
            }
            let g = 1.0 / (1.0 - b2).sqrt();
            let v = Vec4::new(g, g * beta[0], g * beta[1], g * beta[2]);
            let dec = charge_decompose(&c, &v, &ctx.quad, *lmax)?;
            Ok(row("charge_round_trip", dec.q, dec.q, dec.residual, *tolerance))
        }
        CheckSpec::WeylCocycle { stars, tolerance } => {
            let mut elems = Vec::new();
            for name in stars {
                let spec = lookup(&scenario.star_data, name, "star data", &path)?;
                let d = harmonic_fn(&spec.d, 0, &format!("star_data.{name}.d"))?;
                let c = harmonic_fn(&spec.c, -2, &format!("star_data.{name}.c"))?;
                elems.push(StarWeylElement::new(d, c, spec.e, &ctx.quad)?);
            }
            let left = weyl_compose(&weyl_compose(&elems[0], &elems[1], &ctx.quad)?, &elems[2], &ctx.quad)?;
            let right = weyl_compose(&elems[0], &weyl_compose(&elems[1], &elems[2], &ctx.quad)?, &ctx.quad)?;
            let tau = 2.0 * std::f64::consts::PI;
            let d = (left.phase - right.phase).rem_euclid(tau);
            let residual = d.min(tau - d);
            Ok(row("weyl_cocycle", left.phase, right.phase, residual, *tolerance))
        }
        CheckSpec::CasimirValue {
            z,
            expected_value,
            expected_nu,
            tolerance,
        } => {
            let (value, nu, _) = casimir(*z)?;
            let (value, nu) = match (value, nu) {
                (Some(v), Some(n)) => (v, n),
                _ => bail!("{path}.z: no discrete component at z = {z}"),
            };
            let residual = (value - expected_value).abs().max((nu - expected_nu).abs());
            Ok(row("casimir_value", value, *expected_value, residual, *tolerance))
        }
    }
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

fn render_series(name: &str, s: &Series) -> String {
    let mut out = format!("# series: {name}\n# {}\n", s.columns.join(" "));
    for r in &s.rows {
        let cells: Vec<String> = r.iter().map(|v| format!("{v:.12e}")).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

fn cmd_run(
    scenario_path: &Path,
    report_path: Option<&Path>,
    plot_dir: Option<&Path>,
    order: Option<usize>,
    tolerance_scale: Option<f64>,
) -> Result<bool> {
    let text = std::fs::read_to_string(scenario_path)
        .with_context(|| format!("reading {}", scenario_path.display()))?;
    let scenario: Scenario = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", scenario_path.display()))?;
    if scenario.version != 1 {
        bail!("version: unsupported scenario version {}", scenario.version);
    }
    if scenario.tolerance_scale <= 0.0 {
        bail!("tolerance_scale: must be positive");
    }
    let order = order.unwrap_or(scenario.order);
    let tolerance_scale = tolerance_scale.unwrap_or(scenario.tolerance_scale);
    let ctx = Context_ {
        quad: SphereQuadrature::new(order).map_err(|e| anyhow!("order: {e}"))?,
        tolerance_scale,
        seed: scenario.seed,
    };
    let mut rows = Vec::new();
    let mut series = BTreeMap::new();
    for (idx, check) in scenario.checks.iter().enumerate() {
        let row = run_check(check, idx, &scenario, &ctx, &mut series)?;
        println!(
            "{} {}: residual {:.3e} (tolerance {:.3e})",
            if row.pass { "PASS" } else { "FAIL" },
            row.name,
            row.residual,
            row.tolerance
        );
        rows.push(row);
    }
    let all_pass = rows.iter().all(|r| r.pass);
    let report = Report {
        tool_version: env!("CARGO_PKG_VERSION").into(),
        scenario_version: scenario.version,
        order,
        tolerance_scale,
        rows,
        series,
    };
    let json = serde_json::to_string_pretty(&report)? + "\n";
    if let Some(p) = report_path {
        std::fs::write(p, &json).with_context(|| format!("writing {}", p.display()))?;
    } else {
        print!("{json}");
    }
    if let Some(dir) = plot_dir {
        std::fs::create_dir_all(dir)?;
        for (name, s) in &report.series {
            let p = dir.join(format!("{name}.dat"));
            std::fs::write(&p, render_series(name, s))
                .with_context(|| format!("writing {}", p.display()))?;
        }
    }
    Ok(all_pass)
}

fn cmd_plot(report_path: &Path, selection: &str, out: Option<&Path>) -> Result<()> {
    let text = std::fs::read_to_string(report_path)
        .with_context(|| format!("reading {}", report_path.display()))?;
    let report: Report = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", report_path.display()))?;
    let series = report.series.get(selection).ok_or_else(|| {
        let avail: Vec<&str> = report.series.keys().map(|s| s.as_str()).collect();
        anyhow!(
            "unknown series '{selection}'; available: {}",
            if avail.is_empty() {
                "(none)".into()
            } else {
                avail.join(", ")
            }
        )
    })?;
    let rendered = render_series(selection, series);
    match out {
        Some(p) => std::fs::write(p, rendered).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{rendered}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run {
            scenario,
            report,
            plot_dir,
            order,
            tolerance_scale,
        } => cmd_run(
            scenario,
            report.as_deref(),
            plot_dir.as_deref(),
            *order,
            *tolerance_scale,
        ),
        Command::Plot {
            report,
            selection,
            out,
        } => cmd_plot(report, selection, out.as_deref()).map(|()| true),
    };
    match outcome {
        Ok(true) => ExitCode::from(0),
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
