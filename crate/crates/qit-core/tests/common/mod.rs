#![allow(dead_code)]

use qit_core::entropies::Bipartite;
use qit_core::linalg::{proj, CMat, Sampler};
use qit_core::states::DensityOperator;

/// Random pure state on `A⊗B⊗C` with labels `A`, `B`, `C`.
pub fn pure_tripartite(s: &mut Sampler, dims: [usize; 3]) -> DensityOperator {
    let v = s.pure_vector(dims.iter().product()).unwrap();
    DensityOperator::new(proj(&v), dims.to_vec(), vec!["A".into(), "B".into(), "C".into()]).unwrap()
}

/// Random full-rank state on `A⊗B⊗C`.
pub fn mixed_tripartite(s: &mut Sampler, dims: [usize; 3]) -> DensityOperator {
    let m = s.full_density(dims.iter().product()).unwrap();
    DensityOperator::new(m, dims.to_vec(), vec!["A".into(), "B".into(), "C".into()]).unwrap()
}

pub fn cut(rho: &DensityOperator, a: &[&str], b: &[&str]) -> Bipartite {
    Bipartite::from_state(rho, a, b).unwrap()
}

pub fn random_bp(s: &mut Sampler, da: usize, db: usize, rank: usize) -> Bipartite {
    Bipartite::new(s.density(da * db, rank).unwrap(), da, db).unwrap()
}

pub fn close(a: &CMat, b: &CMat, tol: f64) -> bool {
    (a - b).iter().all(|z| z.norm() <= tol)
}
