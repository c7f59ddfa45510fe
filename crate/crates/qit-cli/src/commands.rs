//! Single-shot subcommands.

use std::path::Path;

use serde_json::{json, Value};

use qit_core::apps::{
    chernoff_distance, extractable_length, extractor_delta, helstrom_error, hoeffding_exponent, neyman_pearson,
    stein_second_order, strong_converse_exponent, ur_check, ExtractorInstance,
};
use qit_core::divergences::{divergence_variance, renyi_divergence, Family, RenyiOrder};
use qit_core::entropies::{
    conditional_renyi, max_entropy, min_entropy, von_neumann, Arrow, Bipartite, EntropyFamily, EntropyResult,
};
use qit_core::io::{matrix_to_json, parse_state};
use qit_core::linalg::{c, identity, real_matrix, CMat};
use qit_core::metrics::{fidelity, purified_distance, trace_distance};
use qit_core::sdpsolve::DEFAULT_MAX_PARAMS;
use qit_core::smooth::{
    aep_rates, iid_smooth_bracket, iid_surprisal_cut, smooth_max_entropy_capped, smooth_min_entropy_capped, AepOptions,
};
use qit_core::states::DensityOperator;

use crate::report::{Report, Row, Status};
use crate::{
    usage, AepArgs, ArrowArg, BasisPreset, CliError, CliResult, Cut, EntropyArgs, EntropyQuantity, EvalArgs,
    EvalQuantity, ExtractArgs, FamilyArg, Global, HypotestArgs, SmoothArgs, SmoothKind, TestKind, UrArgs,
};

pub fn load_state(path: &Path, g: &Global) -> CliResult<DensityOperator> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
    let rho = parse_state(&text)?;
    if rho.dim() > g.max_dim {
        return usage(format!("{} has dimension {}, above --max-dim {}", path.display(), rho.dim(), g.max_dim));
    }
    Ok(rho)
}

pub fn mat(m: &CMat) -> Value {
    json!(matrix_to_json(m))
}

/// SDP parameter cap: the library default at the default `--max-dim` of 64,
/// growing with its square.
pub fn max_params(g: &Global) -> usize {
    let scale = (g.max_dim as f64 / 64.0).powi(2);
    ((DEFAULT_MAX_PARAMS as f64 * scale).ceil() as usize).max(1)
}

fn need(x: Option<f64>, flag: &str, what: &str) -> CliResult<f64> {
    x.ok_or_else(|| CliError::Usage(format!("{what} needs --{flag}")))
}

fn check_eps(eps: f64) -> CliResult<()> {
    if !(0.0..1.0).contains(&eps) {
        return usage(format!("--eps must lie in [0, 1), got {eps}"));
    }
    Ok(())
}

pub fn eval(g: &Global, a: &EvalArgs) -> CliResult<Report> {
    let rho = load_state(&a.rho, g)?;
    let sigma = load_state(&a.sigma, g)?;
    let (r, s) = (rho.matrix(), sigma.matrix());
    let renyi = |fam: Family| -> CliResult<(f64, Value)> {
        let alpha = need(a.alpha, "alpha", "this quantity")?;
        let order = RenyiOrder::new(fam, alpha)?;
        let res = renyi_divergence(r, s, order, g.base)?;
        Ok((res.value, json!(res)))
    };
    let plain = |v: qit_core::Result<f64>| -> CliResult<(f64, Value)> { Ok((v?, Value::Null)) };
    let (value, detail) = match a.quantity {
        EvalQuantity::TraceDistance => plain(trace_distance(r, s))?,
        EvalQuantity::Fidelity => plain(fidelity(r, s))?,
        EvalQuantity::PurifiedDistance => plain(purified_distance(r, s))?,
        EvalQuantity::Dmin => renyi(Family::Minimal)?,
        EvalQuantity::Dpetz => renyi(Family::Petz)?,
        EvalQuantity::Dmaximal => renyi(Family::Maximal)?,
        EvalQuantity::Dmax => renyi_at(r, s, Family::Max, f64::INFINITY, g)?,
        EvalQuantity::Umegaki => renyi_at(r, s, Family::Umegaki, 1.0, g)?,
        EvalQuantity::Variance => plain(divergence_variance(r, s, g.base))?,
    };
    let name = clap::ValueEnum::to_possible_value(&a.quantity).map(|p| p.get_name().to_string()).unwrap_or_default();
    let mut rep = Report::new("eval", g.base);
    let witness = json!({"quantity": name, "alpha": a.alpha, "rho": mat(r), "sigma": mat(s)});
    let mut row = Row::new().with("quantity", name).with("alpha", a.alpha.unwrap_or(f64::NAN)).with("value", value);
    if !detail.is_null() {
        row = row.detail(detail);
    }
    rep.push(row, &witness);
    Ok(rep)
}

fn renyi_at(r: &CMat, s: &CMat, fam: Family, alpha: f64, g: &Global) -> CliResult<(f64, Value)> {
    let res = renyi_divergence(r, s, RenyiOrder::new(fam, alpha)?, g.base)?;
    Ok((res.value, json!(res)))
}

pub fn bipartite(cut: &Cut, g: &Global) -> CliResult<(Bipartite, DensityOperator)> {
    let rho = load_state(&cut.state, g)?;
    let a: Vec<&str> = cut.a.iter().map(String::as_str).filter(|s| !s.is_empty()).collect();
    let b: Vec<&str> = cut.b.iter().map(String::as_str).filter(|s| !s.is_empty()).collect();
    if a.is_empty() {
        return usage("--a must name at least one subsystem");
    }
    Ok((Bipartite::from_state(&rho, &a, &b)?, rho))
}

/// Status of an entropy evaluation against `--tol`.
fn entropy_status(res: &EntropyResult, tol: f64) -> Status {
    let sdp_bad = res.certificate.as_ref().is_some_and(|c| c.status != "optimal" || c.relative_gap > tol);
    let iter_bad = res.residual.is_some_and(|r| r > tol) || res.restart_spread.is_some_and(|s| s > tol);
    if sdp_bad || iter_bad {
        Status::NotConverged
    } else {
        Status::Ok
    }
}

pub fn entropy(g: &Global, a: &EntropyArgs) -> CliResult<Report> {
    let (bp, rho) = bipartite(&a.cut, g)?;
    let family = match a.family {
        FamilyArg::Petz => EntropyFamily::Petz,
        FamilyArg::Sandwiched => EntropyFamily::Sandwiched,
    };
    let arrow = match a.arrow {
        ArrowArg::Up => Arrow::Up,
        ArrowArg::Down => Arrow::Down,
    };
    let mut rep = Report::new("entropy", g.base);
    let witness_base = json!({"state": mat(rho.matrix()), "a": a.cut.a, "b": a.cut.b});
    let (label, res) = match a.quantity {
        EntropyQuantity::Vn => {
            let v = von_neumann(&bp, g.base)?;
            rep.push(Row::new().with("quantity", "vn").with("alpha", 1.0).with("value", v), &witness_base);
            return Ok(rep);
        }
        EntropyQuantity::Min => ("min", min_entropy(&bp, g.base)?),
        EntropyQuantity::Max => ("max", max_entropy(&bp, g.base)?),
        EntropyQuantity::Renyi => {
            let alpha = need(a.alpha, "alpha", "a Renyi entropy")?;
            ("renyi", conditional_renyi(&bp, family, arrow, alpha, g.base)?)
        }
    };
    rep.mark(entropy_status(&res, g.tol));
    let witness = json!({"input": witness_base, "sigma_b": res.sigma_b.as_ref().map(mat)});
    let row = Row::new()
        .with("quantity", label)
        .with("family", res.family.name())
        .with("arrow", res.arrow.name())
        .with("alpha", res.alpha)
        .with("value", res.value)
        .with("method", json!(res.method).as_str().unwrap_or_default().to_string())
        .detail(json!({
            "certificate": res.certificate,
            "residual": res.residual,
            "restart_spread": res.restart_spread,
        }));
    rep.push(row, &witness);
    Ok(rep)
}

pub fn smooth(g: &Global, a: &SmoothArgs) -> CliResult<Report> {
    check_eps(a.eps)?;
    let (bp, rho) = bipartite(&a.cut, g)?;
    let res = match a.kind {
        SmoothKind::Min => smooth_min_entropy_capped(&bp, a.eps, g.base, max_params(g))?,
        SmoothKind::Max => smooth_max_entropy_capped(&bp, a.eps, g.base, max_params(g))?,
    };
    let mut rep = Report::new("smooth", g.base);
    if res.certificate.as_ref().is_some_and(|c| c.status != "optimal") {
        rep.mark(Status::NotConverged);
    }
    let kind = if a.kind == SmoothKind::Min { "min" } else { "max" };
    let witness = json!({
        "state": mat(rho.matrix()),
        "a": a.cut.a,
        "b": a.cut.b,
        "smoothed": mat(&res.witness.state),
        "sigma_b": res.sigma_b.as_ref().map(mat),
    });
    let row = Row::new()
        .with("kind", kind)
        .with("eps", a.eps)
        .with("value", res.value)
        .with("witness_distance", res.witness.distance)
        .detail(json!({"certificate": res.certificate, "construction": res.witness.construction}));
    rep.push(row, &witness);
    Ok(rep)
}

pub fn hypotest(g: &Global, a: &HypotestArgs) -> CliResult<Report> {
    let rho = load_state(&a.rho, g)?;
    let sigma = load_state(&a.sigma, g)?;
    let (r, s) = (rho.matrix(), sigma.matrix());
    if a.n == 0 {
        return usage("--n must be positive");
    }
    let mut rep = Report::new("hypotest", g.base);
    let witness = json!({"test": format!("{:?}", a.test), "n": a.n, "eps": a.eps, "rate": a.rate, "rho": mat(r), "sigma": mat(s)});
    let row = Row::new().with("n", a.n);
    let row = match a.test {
        TestKind::Helstrom => row.with("test", "helstrom").with("value", helstrom_error(r, s, a.n)?),
        TestKind::NeymanPearson => {
            let eps = need(a.eps, "eps", "neyman-pearson")?;
            if !(0.0..=1.0).contains(&eps) {
                return usage(format!("--eps must lie in [0, 1], got {eps}"));
            }
            let np = neyman_pearson(r, s, a.n, eps)?;
            if np.certificate.status != "optimal" {
                rep.mark(Status::NotConverged);
            }
            row.with("test", "neyman-pearson")
                .with("eps", eps)
                .with("value", np.alpha_star)
                .with("beta", np.beta)
                .detail(json!({"certificate": np.certificate}))
        }
        TestKind::Chernoff => {
            let e = chernoff_distance(r, s, g.base)?;
            row.with("test", "chernoff").with("value", e.value).with("s", e.s)
        }
        TestKind::Hoeffding => {
            let rate = need(a.rate, "rate", "hoeffding")?;
            let e = hoeffding_exponent(r, s, rate, g.base)?;
            row.with("test", "hoeffding").with("rate", rate).with("value", e.value).with("s", e.s)
        }
        TestKind::StrongConverse => {
            let rate = need(a.rate, "rate", "strong-converse")?;
            let e = strong_converse_exponent(r, s, rate, g.base)?;
            row.with("test", "strong-converse").with("rate", rate).with("value", e.value).with("s", e.s)
        }
        TestKind::Stein => {
            let eps = need(a.eps, "eps", "stein")?;
            row.with("test", "stein").with("eps", eps).with("value", stein_second_order(r, s, a.n, eps, g.base)?)
        }
    };
    rep.push(row, &witness);
    Ok(rep)
}

pub fn basis(preset: BasisPreset, d: usize) -> CliResult<CMat> {
    Ok(match preset {
        BasisPreset::Computational => identity(d),
        BasisPreset::Fourier => {
            let w = std::f64::consts::TAU / d as f64;
            let norm = (d as f64).sqrt();
            CMat::from_fn(d, d, |x, y| {
                let t = w * ((x * y) % d) as f64;
                c(t.cos() / norm, t.sin() / norm)
            })
        }
        BasisPreset::Y => {
            if d != 2 {
                return usage(format!("the y basis needs a qubit, A has dimension {d}"));
            }
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let mut m = real_matrix(&[&[h, h], &[0.0, 0.0]]);
            m[(1, 0)] = c(0.0, h);
            m[(1, 1)] = c(0.0, -h);
            m
        }
    })
}

pub fn ur(g: &Global, a: &UrArgs) -> CliResult<Report> {
    let rho = load_state(&a.state, g)?;
    if rho.dims().len() != 3 {
        return usage(format!("ur needs a tripartite state, got {} subsystems", rho.dims().len()));
    }
    let d = rho.dims()[0];
    let (x, z) = (basis(a.x_basis, d)?, basis(a.z_basis, d)?);
    let res = ur_check(&rho, &x, &z, a.alpha, g.base)?;
    let mut rep = Report::new("ur", g.base);
    let witness = json!({"state": mat(rho.matrix()), "x": mat(&x), "z": mat(&z), "alpha": a.alpha});
    let row = Row::new()
        .with("alpha", res.alpha)
        .with("beta", res.beta)
        .with("h_xb", res.h_xb)
        .with("h_zc", res.h_yc)
        .with("lhs", res.lhs)
        .with("rhs", res.rhs)
        .with("slack", res.slack)
        .with("overlap", res.overlap);
    rep.push(row, &witness);
    Ok(rep)
}

pub fn extract(g: &Global, a: &ExtractArgs) -> CliResult<Report> {
    let rho = load_state(&a.state, g)?;
    let inst = ExtractorInstance::new(&rho, a.m)?;
    let rep_x = extractor_delta(&inst, g.base)?;
    let mut rep = Report::new("extract", g.base);
    let witness = json!({"state": mat(rho.matrix()), "m": a.m, "per_seed": rep_x.per_seed});
    let mut row = Row::new()
        .with("m", a.m)
        .with("delta", rep_x.delta)
        .with("joint_delta", rep_x.joint_delta.unwrap_or(f64::NAN))
        .with("h2", rep_x.h2)
        .with("h_min", rep_x.h_min)
        .with("collision_bound", rep_x.collision_bound)
        .with("min_entropy_bound", rep_x.min_entropy_bound)
        .with("margin", rep_x.collision_bound - rep_x.delta);
    match (a.eps, a.delta) {
        (Some(eps), Some(delta)) => {
            let labels: Vec<&str> = rho.labels().iter().map(String::as_str).collect();
            let bp = Bipartite::from_state(&rho, &labels[..1], &labels[1..])?;
            let len = extractable_length(&bp, eps, delta, g.base)?;
            row = row.with("length_lower", len.lower).with("length_upper", len.upper);
        }
        (None, None) => {}
        _ => return usage("--eps and --delta go together"),
    }
    rep.push(row, &witness);
    Ok(rep)
}

pub fn aep(g: &Global, a: &AepArgs) -> CliResult<Report> {
    if !(a.eps > 0.0 && a.eps < 1.0) {
        return usage(format!("--eps must lie in (0, 1), got {}", a.eps));
    }
    if a.n.iter().any(|&n| n == 0) {
        return usage("every --n must be positive");
    }
    let mut rep = Report::new("aep", g.base);
    if let Some(p) = &a.pmf {
        let witness = json!({"pmf": p, "eps": a.eps});
        for &n in &a.n {
            let (lo, hi) = iid_smooth_bracket(p, n, a.eps, g.base)?;
            let (clo, chi) = iid_surprisal_cut(p, n, a.eps, g.base)?;
            let row = Row::new()
                .with("n", n)
                .with("eps", a.eps)
                .with("smoothed_lower", lo)
                .with("smoothed_upper", hi)
                .with("cut_lower", clo)
                .with("cut_upper", chi);
            rep.push(row, &witness);
        }
        return Ok(rep);
    }
    let Some(path) = &a.state else {
        return usage("aep needs --state or --pmf");
    };
    let cut = Cut { state: path.clone(), a: a.a.clone(), b: a.b.clone() };
    let (bp, rho) = bipartite(&cut, g)?;
    let opts = AepOptions { max_params: max_params(g), ..AepOptions::default() };
    let rows = aep_rates(&bp, a.eps, &a.n, g.base, &opts)?;
    let witness = json!({"state": mat(rho.matrix()), "a": a.a, "b": a.b, "eps": a.eps});
    for r in rows {
        let row = Row::new()
            .with("n", r.n)
            .with("eps", a.eps)
            .with("lower_bound", r.lower_bound)
            .with("exact", r.exact.unwrap_or(f64::NAN))
            .with("upper_bound", r.upper_bound)
            .with("second_order_ref", r.second_order_ref);
        rep.push(row, &witness);
    }
    Ok(rep)
}
