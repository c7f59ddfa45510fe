//! Seeded property suites. Samples run in parallel; each draws from its own
//! generator seeded by `(seed, index)`, and rows are assembled in index order.

use rayon::prelude::*;
use serde_json::{json, Value};

use qit_core::apps::ur_check;
use qit_core::divergences::{classical_renyi, divergence, nussbaum_szkola, Family};
use qit_core::entropies::{conditional_renyi, min_entropy, Arrow, Bipartite, EntropyFamily};
use qit_core::linalg::{diag, identity, proj, Sampler};
use qit_core::states::{Channel, DensityOperator};
use qit_core::Base;

use crate::commands::{basis, mat};
use crate::report::{Report, Row, Status};
use crate::{usage, BasisPreset, CliResult, Global, Suite, VerifyArgs};

struct Sample {
    residual: f64,
    witness: Value,
}

fn sampler(seed: u64, index: usize) -> Sampler {
    Sampler::new(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ (index as u64).wrapping_add(1))
}

fn tripartite(s: &mut Sampler, dims: [usize; 3]) -> qit_core::Result<DensityOperator> {
    let v = s.pure_vector(dims.iter().product())?;
    DensityOperator::new(proj(&v), dims.to_vec(), vec!["A".into(), "B".into(), "C".into()])
}

/// Largest violation of the three duality relations and the min/max duality.
fn duality(s: &mut Sampler, index: usize, base: Base) -> qit_core::Result<Sample> {
    use Arrow::{Down, Up};
    use EntropyFamily::{Petz, Sandwiched};
    let dims = if index % 2 == 0 { [2, 2, 2] } else { [3, 2, 2] };
    let psi = tripartite(s, dims)?;
    let ab = Bipartite::from_state(&psi, &["A"], &["B"])?;
    let ac = Bipartite::from_state(&psi, &["A"], &["C"])?;
    let h = |bp: &Bipartite, f, a, alpha| conditional_renyi(bp, f, a, alpha, base).map(|r| r.value);
    let mut worst = 0.0f64;
    for alpha in [0.6, 0.75, 1.5, 2.0] {
        let beta = alpha / (2.0 * alpha - 1.0);
        worst = worst
            .max((h(&ab, Petz, Down, alpha)? + h(&ac, Petz, Down, 2.0 - alpha)?).abs())
            .max((h(&ab, Sandwiched, Up, alpha)? + h(&ac, Sandwiched, Up, beta)?).abs())
            .max((h(&ab, Petz, Up, alpha)? + h(&ac, Sandwiched, Down, 1.0 / alpha)?).abs());
    }
    worst = worst.max((h(&ab, Sandwiched, Up, f64::INFINITY)? + h(&ac, Sandwiched, Up, 0.5)?).abs());
    Ok(Sample { residual: worst, witness: json!({"state": mat(psi.matrix()), "dims": dims}) })
}

/// Largest increase of a divergence under a random channel.
fn dpi(s: &mut Sampler, index: usize, base: Base) -> qit_core::Result<Sample> {
    let din = 2 + index % 2;
    let dout = 1 + index % 3;
    let rho = s.full_density(din)?;
    let sigma = s.full_density(din)?;
    let ch = Channel::random(s, din, dout, 2usize.max(din.div_ceil(dout)))?;
    let (fr, fs) = (ch.apply(&rho)?, ch.apply(&sigma)?);
    let u = s.uniform();
    let orders = [
        (Family::Minimal, 0.5 + 3.5 * u),
        (Family::Petz, 0.01 + 1.99 * u),
        (Family::Maximal, 0.01 + 1.99 * u),
        (Family::Umegaki, 1.0),
        (Family::Max, f64::INFINITY),
    ];
    let mut worst = 0.0f64;
    for (fam, alpha) in orders {
        let gain = divergence(&fr, &fs, fam, alpha, base)? - divergence(&rho, &sigma, fam, alpha, base)?;
        worst = worst.max(gain);
    }
    let kraus: Vec<Value> = ch.kraus().iter().map(mat).collect();
    Ok(Sample { residual: worst, witness: json!({"rho": mat(&rho), "sigma": mat(&sigma), "kraus": kraus}) })
}

/// Petz divergence against its Nussbaum–Szkoła distributions.
fn ns(s: &mut Sampler, index: usize, base: Base) -> qit_core::Result<Sample> {
    let d = 2 + index % 3;
    let rho = s.full_density(d)?;
    let sigma = s.full_density(d)?;
    let (p, q) = nussbaum_szkola(&rho, &sigma)?;
    let mut worst = 0.0f64;
    for alpha in [0.3, 0.7, 1.0, 1.5, 2.0] {
        let bar = divergence(&rho, &sigma, Family::Petz, alpha, base)?;
        worst = worst.max((bar - classical_renyi(&p, &q, alpha, base)?).abs());
    }
    Ok(Sample { residual: worst, witness: json!({"rho": mat(&rho), "sigma": mat(&sigma)}) })
}

/// Min-entropy program on a classical joint distribution against `−log Σ_y max_x p(x, y)`.
fn sdp(s: &mut Sampler, index: usize, base: Base) -> qit_core::Result<Sample> {
    let dx = 2 + index % 3;
    let dy = 1 + (index / 3) % 3;
    let p = s.simplex(dx * dy);
    let bp = Bipartite::new(diag(&p), dx, dy)?;
    let h = min_entropy(&bp, base)?.value;
    let guess: f64 = (0..dy).map(|y| (0..dx).map(|x| p[x * dy + y]).fold(0.0, f64::max)).sum();
    Ok(Sample { residual: (h + base.log(guess)).abs(), witness: json!({"p": p, "dx": dx, "dy": dy}) })
}

/// Violation of the uncertainty relation for qubit X and Z measurements.
fn ur(s: &mut Sampler, index: usize, base: Base) -> qit_core::Result<Sample> {
    let psi = tripartite(s, [2, 2, 2])?;
    let alpha = [1.0, 2.0, f64::INFINITY, 0.75][index % 4];
    let x = basis(BasisPreset::Fourier, 2).expect("qubit basis");
    let res = ur_check(&psi, &x, &identity(2), alpha, base)?;
    Ok(Sample { residual: (-res.slack).max(0.0), witness: json!({"state": mat(psi.matrix()), "alpha": alpha}) })
}

pub fn verify(g: &Global, a: &VerifyArgs) -> CliResult<Report> {
    if a.samples == 0 {
        return usage("--samples must be positive");
    }
    let run: fn(&mut Sampler, usize, Base) -> qit_core::Result<Sample> = match a.suite {
        Suite::Duality => duality,
        Suite::Dpi => dpi,
        Suite::Ns => ns,
        Suite::Sdp => sdp,
        Suite::Ur => ur,
    };
    let samples: Vec<Sample> = (0..a.samples)
        .into_par_iter()
        .map(|i| run(&mut sampler(g.seed, i), i, g.base))
        .collect::<qit_core::Result<_>>()?;
    let name = clap::ValueEnum::to_possible_value(&a.suite).map(|p| p.get_name().to_string()).unwrap_or_default();
    let mut rep = Report::new("verify", g.base);
    let mut worst = 0.0f64;
    for (i, smp) in samples.iter().enumerate() {
        worst = worst.max(smp.residual);
        let row = Row::new()
            .with("suite", name.as_str())
            .with("sample", i)
            .with("residual", smp.residual)
            .with("pass", smp.residual <= g.tol);
        rep.push(row, &smp.witness);
    }
    let passed = worst <= g.tol;
    if !passed {
        rep.mark(Status::Failed);
    }
    rep.summary = Some(
        Row::new()
            .with("suite", name)
            .with("samples", a.samples)
            .with("seed", g.seed as usize)
            .with("tol", g.tol)
            .with("max_residual", worst)
            .with("passed", passed),
    );
    Ok(rep)
}
