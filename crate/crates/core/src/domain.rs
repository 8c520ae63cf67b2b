//! Design space, configurations, outcomes and Pareto dominance.
//!
//! Objectives are always held in minimization space: production cost as is
//! and tensile strength negated.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::math::{clamp_unit, mean, round_half_up, sample_variance};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariableKind {
    Binary,
    Integer,
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub id: String,
    pub name: String,
    pub kind: VariableKind,
    pub lower: f64,
    pub upper: f64,
    pub unit: String,
}

impl VariableSpec {
    pub fn binary(id: &str, name: &str) -> Self {
        Self {
            id: id.into(),
            name: name.into(),
            kind: VariableKind::Binary,
            lower: 0.0,
            upper: 1.0,
            unit: String::new(),
        }
    }

    pub fn integer(id: &str, name: &str, lower: f64, upper: f64, unit: &str) -> Self {
        Self {
            id: id.into(),
            name: name.into(),
            kind: VariableKind::Integer,
            lower,
            upper,
            unit: unit.into(),
        }
    }

    pub fn continuous(id: &str, name: &str, lower: f64, upper: f64, unit: &str) -> Self {
        Self {
            id: id.into(),
            name: name.into(),
            kind: VariableKind::Continuous,
            lower,
            upper,
            unit: unit.into(),
        }
    }

    #[inline]
    pub fn range(&self) -> f64 {
        self.upper - self.lower
    }

    /// Applies the integrality rules: binary → {0, 1} by the 0.5 threshold,
    /// integer → round half-up. Values are clamped into bounds first.
    pub fn snap(&self, value: f64) -> f64 {
        let v = value.max(self.lower).min(self.upper);
        match self.kind {
            VariableKind::Binary => {
                if v >= 0.5 {
                    1.0
                } else {
                    0.0
                }
            }
            VariableKind::Integer => round_half_up(v).max(self.lower).min(self.upper),
            VariableKind::Continuous => v,
        }
    }

    fn check(&self, value: f64) -> Result<()> {
        let out = || Error::OutOfBounds {
            variable: self.id.clone(),
            value,
            lower: self.lower,
            upper: self.upper,
        };
        if !value.is_finite() || value < self.lower || value > self.upper {
            return Err(out());
        }
        match self.kind {
            VariableKind::Binary if value != 0.0 && value != 1.0 => Err(Error::domain(alloc::format!(
                "{} must be 0 or 1, got {value}",
                self.id
            ))),
            VariableKind::Integer if value != round_half_up(value) => Err(Error::domain(
                alloc::format!("{} must be a whole number, got {value}", self.id),
            )),
            _ => Ok(()),
        }
    }
}

/// Ordered list of decision variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSpace {
    variables: Vec<VariableSpec>,
}

impl DesignSpace {
    pub fn new(variables: Vec<VariableSpec>) -> Result<Self> {
        if variables.is_empty() {
            return Err(Error::domain("design space needs at least one variable"));
        }
        for v in &variables {
            match v.kind {
                VariableKind::Binary if v.lower != 0.0 || v.upper != 1.0 => {
                    return Err(Error::domain(alloc::format!(
                        "binary variable {} must have domain [0, 1]",
                        v.id
                    )))
                }
                _ if !(v.lower < v.upper) || !v.lower.is_finite() || !v.upper.is_finite() => {
                    return Err(Error::domain(alloc::format!(
                        "variable {} needs finite lower < upper",
                        v.id
                    )))
                }
                _ => {}
            }
        }
        Ok(Self { variables })
    }

    /// The six plasma-treatment settings of the bonding process.
    pub fn bonding() -> Self {
        Self {
            variables: alloc::vec![
                VariableSpec::binary("v1", "Pre-processing"),
                VariableSpec::continuous("v2", "Power setting", 300.0, 500.0, "W"),
                VariableSpec::continuous("v3", "Torch speed", 5.0, 250.0, "mm/s"),
                VariableSpec::continuous("v4", "Distance between torch and sample", 0.2, 2.0, "cm"),
                VariableSpec::integer("v5", "Number of passes", 1.0, 50.0, "passes"),
                VariableSpec::continuous("v6", "Time between treatment and glue application", 1.0, 120.0, "min"),
            ],
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.variables.len()
    }

    pub fn variables(&self) -> &[VariableSpec] {
        &self.variables
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.id == id)
    }

    /// Validates natural-unit values and wraps them.
    pub fn configuration(&self, values: Vec<f64>) -> Result<Configuration> {
        if values.len() != self.dim() {
            return Err(Error::domain(alloc::format!(
                "expected {} values, got {}",
                self.dim(),
                values.len()
            )));
        }
        for (spec, &v) in self.variables.iter().zip(&values) {
            spec.check(v)?;
        }
        Ok(Configuration { values })
    }

    /// Affine min–max map into the unit hypercube.
    pub fn encode(&self, config: &Configuration) -> Result<Vec<f64>> {
        if config.values.len() != self.dim() {
            return Err(Error::domain(alloc::format!(
                "expected {} values, got {}",
                self.dim(),
                config.values.len()
            )));
        }
        self.variables
            .iter()
            .zip(&config.values)
            .map(|(spec, &v)| {
                spec.check(v)?;
                Ok((v - spec.lower) / spec.range())
            })
            .collect()
    }

    /// Inverse of [`encode`](Self::encode); coordinates are clipped to
    /// [0, 1] and the integrality rules applied.
    pub fn decode(&self, unit: &[f64]) -> Configuration {
        let values = self
            .variables
            .iter()
            .zip(unit)
            .map(|(spec, &u)| spec.snap(spec.lower + clamp_unit(u) * spec.range()))
            .collect();
        Configuration { values }
    }

    /// Rounds a unit-cube point to the nearest runnable configuration and
    /// returns it in unit coordinates again.
    pub fn snap_unit(&self, unit: &[f64]) -> Vec<f64> {
        self.variables
            .iter()
            .zip(unit)
            .map(|(spec, &u)| (spec.snap(spec.lower + clamp_unit(u) * spec.range()) - spec.lower) / spec.range())
            .collect()
    }
}

/// Decision vector in natural units (binary as 0/1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Configuration {
    values: Vec<f64>,
}

impl Configuration {
    /// Wraps values without validation; prefer [`DesignSpace::configuration`].
    pub fn from_values_unchecked(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Same point up to a tolerance relative to each variable's range.
    pub fn approx_eq(&self, other: &Configuration, space: &DesignSpace) -> bool {
        self.values.len() == other.values.len()
            && space
                .variables()
                .iter()
                .zip(self.values.iter().zip(&other.values))
                .all(|(spec, (a, b))| (a - b).abs() <= 1e-9 * spec.range())
    }
}

/// Objectives in minimization space: `(cost, -strength)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector {
    pub pc: f64,
    pub neg_ts: f64,
}

impl ObjectiveVector {
    pub fn new(pc: f64, neg_ts: f64) -> Self {
        Self { pc, neg_ts }
    }

    pub fn from_outcome(o: &Outcome) -> Self {
        Self {
            pc: o.cost,
            neg_ts: -o.strength,
        }
    }

    #[inline]
    pub fn as_array(&self) -> [f64; 2] {
        [self.pc, self.neg_ts]
    }

    #[inline]
    pub fn strength(&self) -> f64 {
        -self.neg_ts
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FailureMode {
    Adhesion,
    Cohesive,
    Substrate,
}

impl FailureMode {
    pub const ALL: [FailureMode; 3] = [FailureMode::Adhesion, FailureMode::Cohesive, FailureMode::Substrate];

    pub fn as_str(&self) -> &'static str {
        match self {
            FailureMode::Adhesion => "adhesion",
            FailureMode::Cohesive => "cohesive",
            FailureMode::Substrate => "substrate",
        }
    }
}

impl fmt::Display for FailureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FailureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FailureMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s.trim())
            .ok_or_else(|| {
                Error::Parse(alloc::format!(
                    "unknown failure_mode {s:?}; valid values: adhesion, cohesive, substrate"
                ))
            })
    }
}

/// Result of one physical (or simulated) replication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    /// Lap shear strength in MPa.
    pub strength: f64,
    /// Production cost in euros.
    pub cost: f64,
    pub failure_mode: FailureMode,
    pub visual_damage: bool,
}

impl Outcome {
    /// No visual damage and no adhesion failure.
    #[inline]
    pub fn feasible(&self) -> bool {
        !self.visual_damage && self.failure_mode != FailureMode::Adhesion
    }
}

/// Fraction of feasible outcomes; 0 for an empty list.
pub fn feasibility_fraction(outcomes: &[Outcome]) -> f64 {
    if outcomes.is_empty() {
        return 0.0;
    }
    outcomes.iter().filter(|o| o.feasible()).count() as f64 / outcomes.len() as f64
}

/// A configuration with all of its replication outcomes and summary
/// statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicatedObservation {
    pub config: Configuration,
    pub outcomes: Vec<Outcome>,
    pub mean_objectives: ObjectiveVector,
    /// Unbiased sample variances of `(pc, neg_ts)`.
    pub var_objectives: [f64; 2],
    pub pf: f64,
    pub majority_feasible: bool,
}

impl ReplicatedObservation {
    pub fn new(config: Configuration, outcomes: Vec<Outcome>) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::domain("an observation needs at least one replication outcome"));
        }
        if outcomes.iter().any(|o| !o.strength.is_finite() || !o.cost.is_finite()) {
            return Err(Error::domain("outcome values must be finite"));
        }
        let pcs: Vec<f64> = outcomes.iter().map(|o| o.cost).collect();
        let nts: Vec<f64> = outcomes.iter().map(|o| -o.strength).collect();
        let pf = feasibility_fraction(&outcomes);
        Ok(Self {
            config,
            mean_objectives: ObjectiveVector::new(mean(&pcs), mean(&nts)),
            var_objectives: [sample_variance(&pcs), sample_variance(&nts)],
            pf,
            majority_feasible: pf >= 0.5,
            outcomes,
        })
    }

    #[inline]
    pub fn replications(&self) -> usize {
        self.outcomes.len()
    }
}

/// `a` is no worse everywhere and strictly better somewhere.
pub fn dominates_slice(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

pub fn dominates(a: &ObjectiveVector, b: &ObjectiveVector) -> bool {
    dominates_slice(&a.as_array(), &b.as_array())
}

pub fn strictly_dominates(a: &ObjectiveVector, b: &ObjectiveVector) -> bool {
    a.pc < b.pc && a.neg_ts < b.neg_ts
}

/// Indices (ascending) of the points no other point dominates. Duplicates
/// of a non-dominated point are all kept.
pub fn pareto_filter(points: &[ObjectiveVector]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (points[i], points[j]);
        a.pc.partial_cmp(&b.pc)
            .unwrap_or(Ordering::Equal)
            .then(a.neg_ts.partial_cmp(&b.neg_ts).unwrap_or(Ordering::Equal))
            .then(i.cmp(&j))
    });

    let mut keep = Vec::new();
    // Smallest second objective among points with a strictly smaller first one.
    let mut best_before = f64::INFINITY;
    let mut g = 0;
    while g < order.len() {
        let pc = points[order[g]].pc;
        let mut end = g;
        while end < order.len() && points[order[end]].pc == pc {
            end += 1;
        }
        let group_min = points[order[g]].neg_ts;
        if group_min < best_before {
            keep.extend(order[g..end].iter().copied().filter(|&i| points[i].neg_ts == group_min));
        }
        best_before = best_before.min(group_min);
        g = end;
    }
    keep.sort_unstable();
    keep
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "v{}={}", i + 1, v)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn ov(pc: f64, nts: f64) -> ObjectiveVector {
        ObjectiveVector::new(pc, nts)
    }

    fn outcome(feasible: bool) -> Outcome {
        Outcome {
            strength: 20.0,
            cost: 1.0,
            failure_mode: if feasible { FailureMode::Cohesive } else { FailureMode::Adhesion },
            visual_damage: false,
        }
    }

    #[test]
    fn dominance_examples() {
        assert!(dominates(&ov(1.0, -30.0), &ov(2.0, -20.0)));
        assert!(!dominates(&ov(1.0, -30.0), &ov(1.0, -30.0)));
        assert!(!dominates(&ov(1.0, -20.0), &ov(2.0, -30.0)));
    }

    #[test]
    fn strict_dominance_examples() {
        assert!(strictly_dominates(&ov(1.0, -30.0), &ov(2.0, -20.0)));
        assert!(!strictly_dominates(&ov(1.0, -30.0), &ov(1.0, -20.0)));
        assert!(!strictly_dominates(&ov(2.0, -20.0), &ov(1.0, -30.0)));
    }

    #[test]
    fn pareto_filter_examples() {
        assert_eq!(pareto_filter(&[ov(1.0, -30.0), ov(2.0, -20.0), ov(1.5, -25.0)]), vec![0]);
        assert_eq!(pareto_filter(&[ov(1.0, -30.0)]), vec![0]);
        assert!(pareto_filter(&[]).is_empty());
        assert_eq!(pareto_filter(&[ov(1.0, -30.0), ov(1.0, -30.0), ov(1.0, -29.0)]), vec![0, 1]);
        // equal second objective, larger first objective is dominated
        assert_eq!(pareto_filter(&[ov(2.0, -30.0), ov(1.0, -30.0)]), vec![1]);
    }

    #[test]
    fn encode_decode_examples() {
        let space = DesignSpace::bonding();
        let c = space.configuration(vec![0.0, 300.0, 5.0, 1.1, 1.0, 1.0]).unwrap();
        let u = space.encode(&c).unwrap();
        assert_eq!(u[1], 0.0);
        assert!((u[3] - 0.5).abs() < 1e-15);
        let c = space.configuration(vec![1.0, 500.0, 250.0, 2.0, 50.0, 120.0]).unwrap();
        assert_eq!(space.encode(&c).unwrap(), vec![1.0; 6]);
    }

    #[test]
    fn out_of_bounds_names_variable() {
        let space = DesignSpace::bonding();
        let err = space.configuration(vec![0.0, 550.0, 5.0, 1.1, 1.0, 1.0]).unwrap_err();
        match err {
            Error::OutOfBounds { variable, .. } => assert_eq!(variable, "v2"),
            e => panic!("unexpected {e:?}"),
        }
        assert!(space.configuration(vec![0.5, 400.0, 5.0, 1.1, 1.0, 1.0]).is_err());
        assert!(space.configuration(vec![0.0, 400.0, 5.0, 1.1, 1.5, 1.0]).is_err());
    }

    #[test]
    fn bonding_space_matches_table() {
        let s = DesignSpace::bonding();
        assert_eq!(s.dim(), 6);
        let b: Vec<(f64, f64)> = s.variables().iter().map(|v| (v.lower, v.upper)).collect();
        assert_eq!(b, vec![(0.0, 1.0), (300.0, 500.0), (5.0, 250.0), (0.2, 2.0), (1.0, 50.0), (1.0, 120.0)]);
        assert_eq!(s.variables()[0].kind, VariableKind::Binary);
        assert_eq!(s.variables()[4].kind, VariableKind::Integer);
    }

    #[test]
    fn snapping_rules() {
        let s = DesignSpace::bonding();
        let c = s.decode(&[0.5, 0.0, 0.0, 0.0, 12.5 / 49.0, 0.0]);
        assert_eq!(c.values()[0], 1.0);
        assert_eq!(c.values()[4], 14.0);
        let c = s.decode(&[0.49, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(c.values()[0], 0.0);
    }

    #[test]
    fn majority_feasibility_exhaustive() {
        for r in 1..=10usize {
            for k in 0..=r {
                let outs: Vec<Outcome> = (0..r).map(|i| outcome(i < k)).collect();
                let obs = ReplicatedObservation::new(Configuration::from_values_unchecked(vec![0.0]), outs).unwrap();
                assert_eq!(obs.pf, k as f64 / r as f64);
                assert_eq!(obs.majority_feasible, obs.pf >= 0.5);
                assert_eq!(obs.majority_feasible, 2 * k >= r);
            }
        }
    }

    #[test]
    fn observation_statistics() {
        let outs = vec![
            Outcome { strength: 10.0, cost: 1.0, failure_mode: FailureMode::Cohesive, visual_damage: false },
            Outcome { strength: 14.0, cost: 1.0, failure_mode: FailureMode::Adhesion, visual_damage: false },
            Outcome { strength: 12.0, cost: 1.0, failure_mode: FailureMode::Substrate, visual_damage: true },
        ];
        let obs = ReplicatedObservation::new(Configuration::from_values_unchecked(vec![0.0]), outs).unwrap();
        assert_eq!(obs.mean_objectives, ov(1.0, -12.0));
        assert_eq!(obs.var_objectives, [0.0, 4.0]);
        assert!((obs.pf - 1.0 / 3.0).abs() < 1e-15);
        assert!(!obs.majority_feasible);
        let single = ReplicatedObservation::new(Configuration::from_values_unchecked(vec![0.0]), vec![outcome(true)]).unwrap();
        assert_eq!(single.var_objectives, [0.0, 0.0]);
    }

    fn brute_force(points: &[ObjectiveVector]) -> Vec<usize> {
        (0..points.len())
            .filter(|&i| !points.iter().any(|p| dominates(p, &points[i])))
            .collect()
    }

    proptest! {
        #[test]
        fn dominance_irreflexive_and_transitive(pts in proptest::collection::vec((-3i32..3, -3i32..3), 3..12)) {
            let pts: Vec<ObjectiveVector> = pts.into_iter().map(|(a, b)| ov(a as f64, b as f64)).collect();
            for a in &pts {
                prop_assert!(!dominates(a, a));
                for b in &pts {
                    for c in &pts {
                        if dominates(a, b) && dominates(b, c) {
                            prop_assert!(dominates(a, c));
                        }
                    }
                }
            }
        }

        #[test]
        fn pareto_filter_matches_brute_force(pts in proptest::collection::vec((-5i32..5, -5i32..5), 0..40)) {
            let pts: Vec<ObjectiveVector> = pts.into_iter().map(|(a, b)| ov(a as f64, b as f64)).collect();
            let kept = pareto_filter(&pts);
            prop_assert_eq!(&kept, &brute_force(&pts));
            for &i in &kept {
                for &j in &kept {
                    prop_assert!(!dominates(&pts[i], &pts[j]));
                }
            }
            for i in 0..pts.len() {
                if !kept.contains(&i) {
                    prop_assert!(kept.iter().any(|&k| dominates(&pts[k], &pts[i])));
                }
            }
        }

        #[test]
        fn decode_encode_round_trip(pre in 0u8..2, p in 300.0f64..500.0, s in 5.0f64..250.0, h in 0.2f64..2.0, n in 1u32..=50, t in 1.0f64..120.0) {
            let space = DesignSpace::bonding();
            let c = space.configuration(vec![pre as f64, p, s, h, n as f64, t]).unwrap();
            let back = space.decode(&space.encode(&c).unwrap());
            prop_assert!(back.approx_eq(&c, &space));
            prop_assert_eq!(back.values()[0], c.values()[0]);
            prop_assert_eq!(back.values()[4], c.values()[4]);
        }
    }
}
