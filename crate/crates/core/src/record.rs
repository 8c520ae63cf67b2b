//! Flat `key=value` text records for configurations and outcomes.
//!
//! A configuration record looks like
//! `v1=0,v2=400,v3=127.5,v4=1.1,v5=13,v6=1`; an outcome record like
//! `strength=28.1,cost=0.64,failure_mode=cohesive,visual_damage=false`.
//! Pairs may be separated by commas, semicolons or whitespace. A
//! replicated observation is written as one record per replication carrying
//! both the configuration and the outcome keys.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::domain::{Configuration, DesignSpace, FailureMode, Outcome, ReplicatedObservation};
use crate::{Error, Result};

pub const OUTCOME_KEYS: [&str; 4] = ["strength", "cost", "failure_mode", "visual_damage"];

/// Splits a record into `(key, value)` pairs.
pub fn parse_pairs(text: &str) -> Result<Vec<(&str, &str)>> {
    let mut pairs: Vec<(&str, &str)> = Vec::new();
    for token in text
        .split(|c: char| c == ',' || c == ';' || c.is_whitespace())
        .filter(|t| !t.is_empty())
    {
        let (k, v) = token
            .split_once('=')
            .ok_or_else(|| Error::Parse(alloc::format!("expected key=value, got {token:?}")))?;
        let k = k.trim();
        if pairs.iter().any(|(seen, _)| *seen == k) {
            return Err(Error::Parse(alloc::format!("duplicate key {k:?}")));
        }
        pairs.push((k, v.trim()));
    }
    Ok(pairs)
}

fn lookup<'a>(pairs: &[(&str, &'a str)], key: &str) -> Result<&'a str> {
    pairs
        .iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| Error::Parse(alloc::format!("missing key {key:?}")))
}

fn number(key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| Error::Parse(alloc::format!("{key}: {value:?} is not a number")))
}

fn boolean(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Parse(alloc::format!("{key}: expected true or false, got {value:?}"))),
    }
}

pub fn format_configuration(space: &DesignSpace, config: &Configuration) -> String {
    let mut out = String::new();
    for (i, (spec, v)) in space.variables().iter().zip(config.values()).enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{}={}", spec.id, v);
    }
    out
}

fn configuration_from_pairs(space: &DesignSpace, pairs: &[(&str, &str)]) -> Result<Configuration> {
    let values = space
        .variables()
        .iter()
        .map(|spec| number(&spec.id, lookup(pairs, &spec.id)?))
        .collect::<Result<Vec<f64>>>()?;
    space.configuration(values)
}

fn outcome_from_pairs(pairs: &[(&str, &str)]) -> Result<Outcome> {
    Ok(Outcome {
        strength: number("strength", lookup(pairs, "strength")?)?,
        cost: number("cost", lookup(pairs, "cost")?)?,
        failure_mode: lookup(pairs, "failure_mode")?.parse()?,
        visual_damage: boolean("visual_damage", lookup(pairs, "visual_damage")?)?,
    })
}

fn reject_unknown(pairs: &[(&str, &str)], allowed: impl Fn(&str) -> bool) -> Result<()> {
    match pairs.iter().find(|(k, _)| !allowed(k)) {
        Some((k, _)) => Err(Error::Parse(alloc::format!("unknown key {k:?}"))),
        None => Ok(()),
    }
}

pub fn parse_configuration(space: &DesignSpace, text: &str) -> Result<Configuration> {
    let pairs = parse_pairs(text)?;
    reject_unknown(&pairs, |k| space.index_of(k).is_some())?;
    configuration_from_pairs(space, &pairs)
}

pub fn format_outcome(outcome: &Outcome) -> String {
    alloc::format!(
        "strength={},cost={},failure_mode={},visual_damage={}",
        outcome.strength,
        outcome.cost,
        outcome.failure_mode,
        outcome.visual_damage
    )
}

pub fn parse_outcome(text: &str) -> Result<Outcome> {
    let pairs = parse_pairs(text)?;
    reject_unknown(&pairs, |k| OUTCOME_KEYS.contains(&k))?;
    outcome_from_pairs(&pairs)
}

/// Parses a failure mode string; the error lists the valid values.
pub fn parse_failure_mode(text: &str) -> Result<FailureMode> {
    text.parse()
}

/// One record per replication, each carrying the configuration keys.
pub fn format_observation(space: &DesignSpace, obs: &ReplicatedObservation) -> Vec<String> {
    let config = format_configuration(space, &obs.config);
    obs.outcomes
        .iter()
        .map(|o| alloc::format!("{config},{}", format_outcome(o)))
        .collect()
}

/// Inverse of [`format_observation`]: all records must name the same
/// configuration.
pub fn parse_observation<'a>(
    space: &DesignSpace,
    records: impl IntoIterator<Item = &'a str>,
) -> Result<ReplicatedObservation> {
    let mut config: Option<Configuration> = None;
    let mut outcomes = Vec::new();
    for record in records {
        let pairs = parse_pairs(record)?;
        reject_unknown(&pairs, |k| space.index_of(k).is_some() || OUTCOME_KEYS.contains(&k))?;
        let c = configuration_from_pairs(space, &pairs)?;
        match &config {
            Some(first) if !first.approx_eq(&c, space) => {
                return Err(Error::Parse("records name different configurations".into()))
            }
            Some(_) => {}
            None => config = Some(c),
        }
        outcomes.push(outcome_from_pairs(&pairs)?);
    }
    let config = config.ok_or_else(|| Error::Parse("no records".into()))?;
    ReplicatedObservation::new(config, outcomes)
}
