//! Deterministic synthetic tensors.
//!
//! Distributions are written `name` or `name(args)`:
//!
//! * `uniform`
//! * `constant(V)`
//! * `two-cluster(P_LOW, SPREAD)`: values packed near 0 and near 255, the
//!   way signed 8-bit layers look when read as unsigned bytes. Each cluster
//!   decays geometrically over `SPREAD` values; a thin uniform tail of
//!   [`TAIL_FRACTION`] fills the gap between them.
//! * `sparse(ZERO_FRACTION)`: zeros, otherwise nonzero two-cluster values.
//! * `custom(PATH)`: 256 non-negative weights, whitespace or comma separated.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::distributions::{Distribution as _, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Share of two-cluster values drawn uniformly from between the clusters.
pub const TAIL_FRACTION: f64 = 0.02;

#[derive(Clone, Debug, PartialEq)]
pub enum Distribution {
    Uniform,
    Constant(u8),
    TwoCluster { p_low: f64, spread: u8 },
    Sparse { zero_fraction: f64 },
    Custom(Box<[f64; 256]>),
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distribution::Uniform => write!(f, "uniform"),
            Distribution::Constant(v) => write!(f, "constant({v})"),
            Distribution::TwoCluster { p_low, spread } => {
                write!(f, "two-cluster({p_low},{spread})")
            }
            Distribution::Sparse { zero_fraction } => write!(f, "sparse({zero_fraction})"),
            Distribution::Custom(_) => write!(f, "custom"),
        }
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

fn fraction(s: &str) -> Result<f64> {
    let x: f64 = s
        .trim()
        .parse()
        .map_err(|_| bad(format!("not a number: {s:?}")))?;
    if !(0.0..=1.0).contains(&x) {
        return Err(bad(format!("{x} is not in [0, 1]")));
    }
    Ok(x)
}

impl FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match s.find(['(', ':']) {
            Some(i) => {
                let rest = &s[i + 1..];
                let rest = if s.as_bytes()[i] == b'(' {
                    rest.strip_suffix(')')
                        .ok_or_else(|| bad(format!("missing ')' in {s:?}")))?
                } else {
                    rest
                };
                (&s[..i], Some(rest))
            }
            None => (s, None),
        };
        let args: Vec<&str> = args
            .map(|a| a.split(',').map(str::trim).collect())
            .unwrap_or_default();
        let want = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(bad(format!(
                    "{name} takes {n} argument(s), got {}",
                    args.len()
                )))
            }
        };
        match name {
            "uniform" => {
                want(0)?;
                Ok(Distribution::Uniform)
            }
            "constant" => {
                want(1)?;
                let v = args[0]
                    .parse()
                    .map_err(|_| bad(format!("bad byte value {:?}", args[0])))?;
                Ok(Distribution::Constant(v))
            }
            "two-cluster" => {
                want(2)?;
                let p_low = fraction(args[0])?;
                let spread: u8 = args[1]
                    .parse()
                    .map_err(|_| bad(format!("bad spread {:?}", args[1])))?;
                if !(1..=128).contains(&spread) {
                    return Err(bad("spread must be in 1..=128"));
                }
                Ok(Distribution::TwoCluster { p_low, spread })
            }
            "sparse" => {
                want(1)?;
                Ok(Distribution::Sparse {
                    zero_fraction: fraction(args[0])?,
                })
            }
            "custom" => {
                if args.is_empty() {
                    return Err(bad("custom needs a histogram file path"));
                }
                // Paths may contain commas.
                let path = s[name.len() + 1..].trim_end_matches(')');
                Distribution::from_histogram_file(Path::new(path))
            }
            _ => Err(bad(format!("unknown distribution {name:?}"))),
        }
    }
}

impl Distribution {
    /// Reads 256 non-negative weights.
    pub fn from_histogram_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_weights_text(&text)
    }

    pub fn from_weights_text(text: &str) -> Result<Self> {
        let weights = text
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| bad(format!("bad weight {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let weights: [f64; 256] = weights
            .try_into()
            .map_err(|w: Vec<f64>| bad(format!("expected 256 weights, found {}", w.len())))?;
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0))
            || weights.iter().sum::<f64>() <= 0.0
        {
            return Err(bad("weights must be non-negative with a positive sum"));
        }
        Ok(Distribution::Custom(Box::new(weights)))
    }
}

struct ClusterSampler {
    p_low: f64,
    spread: u8,
    offsets: WeightedIndex<f64>,
}

impl ClusterSampler {
    fn new(p_low: f64, spread: u8) -> Self {
        let weights: Vec<f64> = (0..spread).map(|k| 0.5f64.powi(k as i32)).collect();
        ClusterSampler {
            p_low,
            spread,
            offsets: WeightedIndex::new(weights).expect("spread >= 1"),
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> u8 {
        let lo = self.spread as u32;
        let hi = 255 - self.spread as u32;
        if lo <= hi && rng.gen_bool(TAIL_FRACTION) {
            return rng.gen_range(lo..=hi) as u8;
        }
        let k = self.offsets.sample(rng) as u8;
        if rng.gen_bool(self.p_low) {
            k
        } else {
            255 - k
        }
    }
}

/// `count` values from `dist`; identical output for identical `seed`.
pub fn generate(dist: &Distribution, count: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match dist {
        Distribution::Uniform => (0..count).map(|_| rng.gen()).collect(),
        Distribution::Constant(v) => vec![*v; count],
        Distribution::TwoCluster { p_low, spread } => {
            let s = ClusterSampler::new(*p_low, *spread);
            (0..count).map(|_| s.sample(&mut rng)).collect()
        }
        Distribution::Sparse { zero_fraction } => {
            let s = ClusterSampler::new(0.5, 4);
            (0..count)
                .map(|_| {
                    if rng.gen_bool(*zero_fraction) {
                        return 0;
                    }
                    loop {
                        let v = s.sample(&mut rng);
                        if v != 0 {
                            break v;
                        }
                    }
                })
                .collect()
        }
        Distribution::Custom(weights) => {
            let w = WeightedIndex::new(weights.iter().copied()).expect("validated weights");
            (0..count).map(|_| w.sample(&mut rng) as u8).collect()
        }
    }
}
