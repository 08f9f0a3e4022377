//! Instance file format.
//!
//! A JSON header `{k, t, label, kind}` plus either an embedded row-major
//! reward array (`kind: "dense"`) or a named generator spec with parameters
//! and a seed (`kind: "generator"`). Round indices are 1-based. Loaders
//! reject rewards outside `[0,1]` by more than 1e-12 and clamp anything
//! within that tolerance.

use serde::{Deserialize, Serialize};

use crate::instances::{
    gen_polarized, gen_set_disjointness, sample_sign_tree, sign_tree_pair_to_instance,
    BanditInstance, PolarizedParams, SetDisjointnessSpec,
};
use crate::rng::substream;
use crate::{Error, Result};

pub const LOAD_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstanceKind {
    Dense,
    Generator,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub name: String,
    pub params: serde_json::Value,
    pub seed: u64,
}

/// The on-disk description of an instance.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub k: usize,
    pub t: usize,
    pub label: String,
    pub kind: InstanceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rewards: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolarizedFileParams {
    r: usize,
    #[serde(default)]
    light_cap: Option<usize>,
    #[serde(default)]
    heavy_zeros: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SignTreePairFileParams {
    m: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SetDisjointnessFileParams {
    n: usize,
    a: Vec<usize>,
    b: Vec<usize>,
    tau: usize,
    #[serde(default)]
    lambda: Option<(u64, u64)>,
    w: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BernoulliFileParams {
    p: f64,
}

impl InstanceFile {
    pub fn dense(rows: &[Vec<f64>], label: &str) -> Result<Self> {
        let k = rows.len();
        let t = rows.first().map_or(0, Vec::len);
        if k == 0 || t == 0 || rows.iter().any(|r| r.len() != t) {
            return Err(Error::BadDimensions { k, t });
        }
        Ok(Self {
            k,
            t,
            label: label.to_string(),
            kind: InstanceKind::Dense,
            rewards: Some(rows.iter().flatten().copied().collect()),
            generator: None,
        })
    }

    pub fn generator(k: usize, t: usize, label: &str, spec: GeneratorSpec) -> Self {
        Self { k, t, label: label.to_string(), kind: InstanceKind::Generator, rewards: None, generator: Some(spec) }
    }

    /// Materialize the description: validate, clamp, or rerun the named
    /// generator under its recorded seed.
    pub fn to_instance(&self) -> Result<BanditInstance> {
        match self.kind {
            InstanceKind::Dense => {
                let raw = self
                    .rewards
                    .as_ref()
                    .ok_or_else(|| Error::Config("dense instance without rewards".into()))?;
                if raw.len() != self.k * self.t || self.k == 0 || self.t == 0 {
                    return Err(Error::BadDimensions { k: self.k, t: self.t });
                }
                let mut rows = vec![Vec::with_capacity(self.t); self.k];
                for (idx, &v) in raw.iter().enumerate() {
                    let arm = idx / self.t;
                    let round = idx % self.t + 1;
                    let clamped = if (0.0..=1.0).contains(&v) {
                        v
                    } else if (-LOAD_TOLERANCE..0.0).contains(&v) {
                        0.0
                    } else if v > 1.0 && v <= 1.0 + LOAD_TOLERANCE {
                        1.0
                    } else {
                        return Err(Error::RewardOutOfRange { arm, round, value: v });
                    };
                    rows[arm].push(clamped);
                }
                BanditInstance::dense(rows, &self.label)
            }
            InstanceKind::Generator => {
                let spec = self
                    .generator
                    .as_ref()
                    .ok_or_else(|| Error::Config("generator instance without spec".into()))?;
                let inst = run_generator(spec)?;
                if inst.arms() != self.k || inst.horizon() != self.t {
                    return Err(Error::Config(format!(
                        "generator produced {}x{}, header says {}x{}",
                        inst.arms(),
                        inst.horizon(),
                        self.k,
                        self.t
                    )));
                }
                Ok(inst)
            }
        }
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let json = serde_json::to_string(self)?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

use crate::instances::RewardSource;

fn run_generator(spec: &GeneratorSpec) -> Result<BanditInstance> {
    let seed = spec.seed;
    match spec.name.as_str() {
        "polarized" => {
            let p: PolarizedFileParams = from_params(&spec.params)?;
            let (k, t) = dims_from_value(&spec.params)?;
            let mut params = PolarizedParams::new(k, t, p.r);
            if let Some(cap) = p.light_cap {
                params.light_cap = cap;
            }
            if let Some(z) = p.heavy_zeros {
                params.heavy_zeros = z;
            }
            gen_polarized(&params, &mut substream(seed, "gen.polarized", 0))
        }
        "sign-tree-pair" => {
            let p: SignTreePairFileParams = from_params(&spec.params)?;
            let f1 = sample_sign_tree(p.m, &mut substream(seed, "gen.sign-tree", 0))?;
            let f2 = sample_sign_tree(p.m, &mut substream(seed, "gen.sign-tree", 1))?;
            sign_tree_pair_to_instance(&f1, &f2)
        }
        "set-disjointness" => {
            let p: SetDisjointnessFileParams = from_params(&spec.params)?;
            let (_, t) = dims_from_value(&spec.params)?;
            let mut sd = SetDisjointnessSpec::new(p.n, p.a, p.b, p.tau, t, p.w);
            if let Some(lambda) = p.lambda {
                sd.lambda = lambda;
            }
            gen_set_disjointness(&sd)
        }
        "bernoulli" => {
            let p: BernoulliFileParams = from_params(&spec.params)?;
            let (k, t) = dims_from_value(&spec.params)?;
            BanditInstance::bernoulli(k, t, p.p, seed, "bernoulli")
        }
        other => Err(Error::Config(format!("unknown generator `{other}`"))),
    }
}

/// Generators that need the header dimensions read them from sibling keys.
fn dims_from_value(params: &serde_json::Value) -> Result<(usize, usize)> {
    let k = params.get("k").and_then(serde_json::Value::as_u64);
    let t = params.get("t").and_then(serde_json::Value::as_u64);
    match (k, t) {
        (_, Some(t)) => Ok((k.unwrap_or(0) as usize, t as usize)),
        _ => Err(Error::Config("generator params must carry `t` (and `k` where used)".into())),
    }
}

fn from_params<T: serde::de::DeserializeOwned>(params: &serde_json::Value) -> Result<T> {
    // `k`/`t` ride along for dims_from_value; strip them before the typed parse.
    let mut stripped = params.clone();
    if let Some(map) = stripped.as_object_mut() {
        map.remove("k");
        map.remove("t");
    }
    Ok(serde_json::from_value(stripped)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn dense_roundtrip() {
        let rows = vec![vec![0.25, 1.0], vec![0.0, 0.5]];
        let file = InstanceFile::dense(&rows, "rt").unwrap();
        let text = serde_json::to_string(&file).unwrap();
        let back: InstanceFile = serde_json::from_str(&text).unwrap();
        let inst = back.to_instance().unwrap();
        for (arm, row) in rows.iter().enumerate() {
            for round in 1..=2 {
                assert_eq!(inst.reward(arm, round), row[round - 1]);
            }
        }
    }

    #[test]
    fn loader_clamps_within_tolerance_and_rejects_beyond() {
        let mut file = InstanceFile::dense(&[vec![0.5, 0.5]], "clamp").unwrap();
        file.rewards = Some(vec![1.0 + 5e-13, -5e-13]);
        let inst = file.to_instance().unwrap();
        assert_eq!(inst.reward(0, 1), 1.0);
        assert_eq!(inst.reward(0, 2), 0.0);

        file.rewards = Some(vec![1.5, 0.0]);
        assert!(matches!(file.to_instance(), Err(Error::RewardOutOfRange { .. })));
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = r#"{"k":1,"t":1,"label":"x","kind":"dense","rewards":[0.5],"extra":1}"#;
        assert!(serde_json::from_str::<InstanceFile>(text).is_err());
    }

    #[test]
    fn generator_file_is_reproducible() {
        let spec = GeneratorSpec {
            name: "polarized".into(),
            params: json!({"k": 8, "t": 256, "r": 2}),
            seed: 99,
        };
        let file = InstanceFile::generator(8, 256, "pol", spec);
        let a = file.to_instance().unwrap();
        let b = file.to_instance().unwrap();
        for arm in 0..8 {
            for round in 1..=256 {
                assert_eq!(a.reward(arm, round), b.reward(arm, round));
            }
        }
    }

    #[test]
    fn generator_header_mismatch_rejected() {
        let spec = GeneratorSpec {
            name: "bernoulli".into(),
            params: json!({"k": 2, "t": 16, "p": 0.5}),
            seed: 1,
        };
        let file = InstanceFile::generator(3, 16, "bad", spec);
        assert!(file.to_instance().is_err());
    }

    #[test]
    fn sign_tree_pair_generator() {
        let spec = GeneratorSpec { name: "sign-tree-pair".into(), params: json!({"m": 4}), seed: 5 };
        let file = InstanceFile::generator(2, 16, "pair", spec);
        let inst = file.to_instance().unwrap();
        assert_eq!(inst.arms(), 2);
        assert_eq!(inst.horizon(), 16);
    }

    #[test]
    fn set_disjointness_generator() {
        let spec = GeneratorSpec {
            name: "set-disjointness".into(),
            params: json!({"n": 4, "t": 64, "a": [1], "b": [1], "tau": 32, "w": 10}),
            seed: 0,
        };
        let file = InstanceFile::generator(5, 64, "sd", spec);
        let inst = file.to_instance().unwrap();
        assert_eq!(inst.reward(1, 1), 1.0);
        assert_eq!(inst.reward(1, 64), 1.0);
    }
}
