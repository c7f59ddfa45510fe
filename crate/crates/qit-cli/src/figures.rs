//! Built-in figure presets.

use serde_json::json;

use qit_core::divergences::{divergence, divergence_variance, umegaki, Family, RenyiOrder};
use qit_core::entropies::renyi_entropy;
use qit_core::linalg::{diag, real_matrix, CMat};

use crate::commands::mat;
use crate::report::{Report, Row};
use crate::{CliResult, FigArgs, FigureName, Global};

pub fn figure(g: &Global, a: &FigArgs) -> CliResult<Report> {
    match a.name {
        FigureName::RenyiOrgy => renyi_orgy(g),
        FigureName::Tangent => tangent(g),
        FigureName::AepBernoulli => aep_bernoulli(g),
    }
}

pub fn orgy_pair() -> (CMat, CMat) {
    let rho = real_matrix(&[&[5.0, 5.0, 2.0], &[5.0, 5.0, 2.0], &[2.0, 2.0, 2.0]]).unscale(12.0);
    (rho, diag(&[5.0 / 8.0, 2.0 / 8.0, 1.0 / 8.0]))
}

pub fn tangent_pair() -> (CMat, CMat) {
    (real_matrix(&[&[0.5, 0.5], &[0.5, 0.5]]), diag(&[0.01, 0.99]))
}

/// Minimal, Petz and maximal divergences on `α ∈ {0.05, 0.10, …, 3.00}`,
/// with flags for the range where each obeys data processing.
fn renyi_orgy(g: &Global) -> CliResult<Report> {
    let (rho, sigma) = orgy_pair();
    let witness = json!({"rho": mat(&rho), "sigma": mat(&sigma)});
    let mut rep = Report::new("fig", g.base);
    for k in 1..=60 {
        let alpha = k as f64 * 0.05;
        let mut row = Row::new().with("figure", "renyi-orgy").with("alpha", alpha);
        for (name, fam) in [("minimal", Family::Minimal), ("petz", Family::Petz), ("maximal", Family::Maximal)] {
            row = row.with(name, divergence(&rho, &sigma, fam, alpha, g.base)?);
        }
        for (name, fam) in [("minimal_dpi", Family::Minimal), ("petz_dpi", Family::Petz), ("maximal_dpi", Family::Maximal)] {
            row = row.with(name, RenyiOrder::new(fam, alpha)?.dpi_valid());
        }
        rep.push(row, &witness);
    }
    rep.summary = Some(Row::new().with("umegaki", umegaki(&rho, &sigma, g.base)?));
    Ok(rep)
}

/// Minimal and Petz divergences near `α = 1` with the first-order Taylor line
/// `D + (α − 1) V / (2 log e)`.
fn tangent(g: &Global) -> CliResult<Report> {
    let (rho, sigma) = tangent_pair();
    let d = umegaki(&rho, &sigma, g.base)?;
    let v = divergence_variance(&rho, &sigma, g.base)?;
    let witness = json!({"rho": mat(&rho), "sigma": mat(&sigma)});
    let mut rep = Report::new("fig", g.base);
    for k in 50..=150 {
        let alpha = k as f64 / 100.0;
        let row = Row::new()
            .with("figure", "tangent")
            .with("alpha", alpha)
            .with("minimal", divergence(&rho, &sigma, Family::Minimal, alpha, g.base)?)
            .with("petz", divergence(&rho, &sigma, Family::Petz, alpha, g.base)?)
            .with("taylor", d + (alpha - 1.0) * v / (2.0 * g.base.log_e()));
        rep.push(row, &witness);
    }
    rep.summary = Some(Row::new().with("relative_entropy", d).with("variance", v));
    Ok(rep)
}

/// Surprisal rate `−(1/n) log P_n(x^n)` of Bernoulli(0.2) strings against the
/// cumulative probability, type classes sorted by decreasing surprisal.
fn aep_bernoulli(g: &Global) -> CliResult<Report> {
    let p = 0.2f64;
    let mut rep = Report::new("fig", g.base);
    let witness = json!({"p": p, "n": [50, 100, 500, 2500]});
    for n in [50usize, 100, 500, 2500] {
        // ln C(n, k) built up term by term
        let mut ln_binom = vec![0.0f64; n + 1];
        for k in 0..n {
            ln_binom[k + 1] = ln_binom[k] + ((n - k) as f64).ln() - ((k + 1) as f64).ln();
        }
        let mut cumulative = 0.0;
        // k counts the rare outcome; more of them means higher surprisal
        for k in (0..=n).rev() {
            let ln_seq = k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln();
            let mass = (ln_binom[k] + ln_seq).exp();
            cumulative += mass;
            let rate = -g.base.from_nats(ln_seq) / n as f64;
            let row = Row::new()
                .with("figure", "aep-bernoulli")
                .with("n", n)
                .with("k", k)
                .with("surprisal_rate", rate)
                .with("class_probability", mass)
                .with("cumulative", cumulative.min(1.0));
            rep.push(row, &witness);
        }
    }
    let pmf = [p, 1.0 - p];
    rep.summary = Some(
        Row::new()
            .with("h", renyi_entropy(&pmf, 1.0, g.base)?)
            .with("h_min", renyi_entropy(&pmf, f64::INFINITY, g.base)?)
            .with("h_max", renyi_entropy(&pmf, 0.5, g.base)?),
    );
    Ok(rep)
}
