//! Space-filling designs.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng as _, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::domain::{Configuration, DesignSpace};
use crate::seeds::Rng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignMethod {
    Lhs,
    Halton,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub points: Vec<Configuration>,
    pub seed: u64,
    pub method: DesignMethod,
}

/// Unit-cube Latin hypercube: one point per stratum `[i/n, (i+1)/n)` in
/// every dimension, jittered uniformly inside its stratum.
pub fn latin_hypercube_unit(n: usize, dim: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
    let mut points = alloc::vec![alloc::vec![0.0; dim]; n];
    let mut strata: Vec<usize> = (0..n).collect();
    for k in 0..dim {
        strata.shuffle(rng);
        for (point, &s) in points.iter_mut().zip(&strata) {
            point[k] = (s as f64 + rng.random::<f64>()) / n as f64;
        }
    }
    points
}

/// Latin hypercube design mapped into `space`; binary and integer
/// dimensions are rounded after sampling.
pub fn latin_hypercube(n: usize, space: &DesignSpace, seed: u64) -> Result<Design> {
    if n == 0 {
        return Err(Error::domain("design size must be at least 1"));
    }
    let mut rng = Rng::seed_from_u64(seed);
    let points = latin_hypercube_unit(n, space.dim(), &mut rng)
        .iter()
        .map(|u| space.decode(u))
        .collect();
    Ok(Design {
        points,
        seed,
        method: DesignMethod::Lhs,
    })
}

/// First `count` primes.
pub fn primes(count: usize) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::with_capacity(count);
    let mut candidate = 2u64;
    while out.len() < count {
        if out.iter().take_while(|&&p| p * p <= candidate).all(|&p| !candidate.is_multiple_of(p)) {
            out.push(candidate);
        }
        candidate += 1;
    }
    out
}

/// Van der Corput radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut value = 0.0;
    while index > 0 {
        value += (index % base) as f64 * scale;
        index /= base;
        scale *= inv;
    }
    value
}

/// Unit-cube Halton points `skip+1 ..= skip+n`, one prime base per dimension.
pub fn halton_unit(n: usize, dim: usize, skip: usize) -> Vec<Vec<f64>> {
    let bases = primes(dim);
    (0..n)
        .map(|i| {
            let index = (skip + i + 1) as u64;
            bases.iter().map(|&b| radical_inverse(index, b)).collect()
        })
        .collect()
}

pub fn halton(n: usize, space: &DesignSpace, skip: usize) -> Result<Design> {
    if n == 0 {
        return Err(Error::domain("design size must be at least 1"));
    }
    let points = halton_unit(n, space.dim(), skip)
        .iter()
        .map(|u| space.decode(u))
        .collect();
    Ok(Design {
        points,
        seed: skip as u64,
        method: DesignMethod::Halton,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::VariableKind;

    fn strata_ok(design: &Design, space: &DesignSpace) -> bool {
        let n = design.points.len();
        space
            .variables()
            .iter()
            .enumerate()
            .filter(|(_, v)| v.kind == VariableKind::Continuous)
            .all(|(k, _)| {
                let mut seen = alloc::vec![false; n];
                for p in &design.points {
                    let u = space.encode(p).unwrap()[k];
                    let s = ((u * n as f64) as usize).min(n - 1);
                    if seen[s] {
                        return false;
                    }
                    seen[s] = true;
                }
                true
            })
    }

    #[test]
    fn lhs_examples() {
        let space = DesignSpace::bonding();
        let one = latin_hypercube(1, &space, 7).unwrap();
        assert_eq!(one.points.len(), 1);
        assert!(space.encode(&one.points[0]).is_ok());
        let a = latin_hypercube(20, &space, 42).unwrap();
        let b = latin_hypercube(20, &space, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, latin_hypercube(20, &space, 43).unwrap());
        assert!(latin_hypercube(0, &space, 1).is_err());
    }

    #[test]
    fn lhs_stratification() {
        let space = DesignSpace::bonding();
        for n in [2, 5, 20] {
            for seed in 0..10 {
                let d = latin_hypercube(n, &space, seed).unwrap();
                assert!(strata_ok(&d, &space), "n={n} seed={seed}");
                for p in &d.points {
                    assert!(space.configuration(p.values().to_vec()).is_ok());
                }
            }
        }
    }

    #[test]
    fn halton_radical_inverse() {
        let pts = halton_unit(3, 2, 0);
        assert_eq!([pts[0][0], pts[1][0], pts[2][0]], [0.5, 0.25, 0.75]);
        assert!((pts[0][1] - 1.0 / 3.0).abs() < 1e-15);
        assert!((pts[1][1] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(primes(6), alloc::vec![2, 3, 5, 7, 11, 13]);
    }

    #[test]
    fn halton_bounds_and_prefix() {
        let space = DesignSpace::bonding();
        let big = halton(1000, &space, 0).unwrap();
        for p in &big.points {
            assert!(space.configuration(p.values().to_vec()).is_ok());
        }
        for skip in [0, 5] {
            let small = halton(40, &space, skip).unwrap();
            let larger = halton(57, &space, skip).unwrap();
            assert_eq!(&larger.points[..40], &small.points[..]);
        }
        assert!(halton(0, &space, 0).is_err());
    }
}
