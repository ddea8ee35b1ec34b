//! Per-tensor footprint comparison across methods.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::baselines::{
    entropy_bound, rle_footprint, rlez_footprint, shapeshifter_footprint, WidthRule,
    DEFAULT_GROUP_SIZE,
};
use crate::codetable::{CodeTable, Histogram};
use crate::container::compress_tensor;
use crate::error::Result;
use crate::tablegen::{build_table, SearchConfig, TableMode};

/// Column order of the CSV output.
pub const CSV_COLUMNS: [&str; 14] = [
    "name",
    "values",
    "original_bits",
    "apack_bits",
    "apack_payload_bits",
    "rle_bits",
    "rlez_bits",
    "shapeshifter_bits",
    "entropy_bits",
    "apack_ratio",
    "rle_ratio",
    "rlez_ratio",
    "shapeshifter_ratio",
    "entropy_ratio",
];

#[derive(Clone, Debug, PartialEq)]
pub struct RatioRow {
    pub name: String,
    pub num_values: u64,
    pub original_bits: u64,
    /// Whole container including header and chunk framing.
    pub apack_bits: u64,
    /// Symbol and offset payload only.
    pub apack_payload_bits: u64,
    pub rle_bits: u64,
    pub rlez_bits: u64,
    pub shapeshifter_bits: u64,
    pub entropy_bits: f64,
}

fn ratio(original: u64, compressed: f64) -> f64 {
    original as f64 / compressed
}

impl RatioRow {
    pub fn apack_ratio(&self) -> f64 {
        ratio(self.original_bits, self.apack_bits as f64)
    }
    pub fn rle_ratio(&self) -> f64 {
        ratio(self.original_bits, self.rle_bits as f64)
    }
    pub fn rlez_ratio(&self) -> f64 {
        ratio(self.original_bits, self.rlez_bits as f64)
    }
    pub fn shapeshifter_ratio(&self) -> f64 {
        ratio(self.original_bits, self.shapeshifter_bits as f64)
    }
    pub fn entropy_ratio(&self) -> f64 {
        ratio(self.original_bits, self.entropy_bits)
    }

    fn ratios(&self) -> [f64; 5] {
        [
            self.apack_ratio(),
            self.rle_ratio(),
            self.rlez_ratio(),
            self.shapeshifter_ratio(),
            self.entropy_ratio(),
        ]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportOptions {
    pub mode: TableMode,
    /// Inputs sharing one profiled table in activations mode.
    pub samples_per_table: usize,
    pub chunk_size: u32,
    pub width_rule: WidthRule,
    pub search: SearchConfig,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            mode: TableMode::Weights,
            samples_per_table: 1,
            chunk_size: crate::container::DEFAULT_CHUNK_SIZE,
            width_rule: WidthRule::default(),
            search: SearchConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioReport {
    pub rows: Vec<RatioRow>,
}

/// Measures every method on `values` with a given table.
pub fn measure(
    name: &str,
    values: &[u8],
    table: &CodeTable,
    opts: &ReportOptions,
) -> Result<RatioRow> {
    let ct = compress_tensor(values, table, opts.chunk_size)?;
    Ok(RatioRow {
        name: name.to_string(),
        num_values: values.len() as u64,
        original_bits: 8 * values.len() as u64,
        apack_bits: 8 * ct.serialized_len(),
        apack_payload_bits: 8 * ct.payload_len(),
        rle_bits: rle_footprint(values).total_bits,
        rlez_bits: rlez_footprint(values).total_bits,
        shapeshifter_bits: shapeshifter_footprint(values, DEFAULT_GROUP_SIZE, opts.width_rule)
            .total_bits,
        entropy_bits: entropy_bound(&Histogram::from_values(values))?,
    })
}

/// Builds one row per input, in input order. In weights mode each input gets
/// its own table; in activations mode consecutive groups of
/// `samples_per_table` inputs share a table profiled from all of them.
pub fn build_report(inputs: &[(String, Vec<u8>)], opts: &ReportOptions) -> Result<RatioReport> {
    let group = match opts.mode {
        TableMode::Weights => 1,
        TableMode::Activations => opts.samples_per_table.max(1),
    };
    let groups: Vec<Result<Vec<RatioRow>>> = inputs
        .par_chunks(group)
        .map(|members| {
            let mut h = Histogram::default();
            for (_, values) in members {
                h.add_values(values);
            }
            let table = build_table(&h, opts.mode, &opts.search)?;
            members
                .iter()
                .map(|(name, values)| measure(name, values, &table, opts))
                .collect()
        })
        .collect();
    let mut rows = Vec::with_capacity(inputs.len());
    for g in groups {
        rows.extend(g?);
    }
    Ok(RatioReport { rows })
}

fn geomean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x.ln(), n + 1));
    if n == 0 {
        f64::NAN
    } else {
        (sum / n as f64).exp()
    }
}

impl RatioReport {
    /// Geometric mean of each ratio column: apack, rle, rlez, shapeshifter,
    /// entropy.
    pub fn geomean_ratios(&self) -> [f64; 5] {
        std::array::from_fn(|k| geomean(self.rows.iter().map(|r| r.ratios()[k])))
    }

    pub fn to_csv(&self) -> String {
        let mut out = CSV_COLUMNS.join(",");
        out.push('\n');
        for r in &self.rows {
            let [a, rle, rlez, ss, ent] = r.ratios();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{:.3},{:.6},{:.6},{:.6},{:.6},{:.6}",
                csv_field(&r.name),
                r.num_values,
                r.original_bits,
                r.apack_bits,
                r.apack_payload_bits,
                r.rle_bits,
                r.rlez_bits,
                r.shapeshifter_bits,
                r.entropy_bits,
                a,
                rle,
                rlez,
                ss,
                ent
            );
        }
        let [a, rle, rlez, ss, ent] = self.geomean_ratios();
        let _ = writeln!(
            out,
            "geomean,,,,,,,,,{a:.6},{rle:.6},{rlez:.6},{ss:.6},{ent:.6}"
        );
        out
    }

    /// Human-readable table of relative footprints (compressed / original).
    pub fn to_text(&self) -> String {
        let width = self
            .rows
            .iter()
            .map(|r| r.name.len())
            .max()
            .unwrap_or(0)
            .max(7);
        let mut out = format!(
            "{:<width$} {:>12} {:>8} {:>8} {:>8} {:>8} {:>8}\n",
            "tensor", "values", "apack", "rle", "rlez", "ss", "entropy"
        );
        let line = |name: &str, n: String, ratios: [f64; 5]| {
            let rel = ratios.map(|r| 1.0 / r);
            format!(
                "{name:<width$} {n:>12} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>8.4}\n",
                rel[0], rel[1], rel[2], rel[3], rel[4]
            )
        };
        for r in &self.rows {
            out.push_str(&line(&r.name, r.num_values.to_string(), r.ratios()));
        }
        out.push_str(&line("geomean", String::new(), self.geomean_ratios()));
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{generate, Distribution};

    fn inputs() -> Vec<(String, Vec<u8>)> {
        vec![
            (
                "a".into(),
                generate(
                    &Distribution::TwoCluster {
                        p_low: 0.5,
                        spread: 4,
                    },
                    20_000,
                    1,
                ),
            ),
            (
                "b".into(),
                generate(&Distribution::Sparse { zero_fraction: 0.9 }, 20_000, 2),
            ),
            ("c".into(), generate(&Distribution::Constant(0), 20_000, 3)),
        ]
    }

    #[test]
    fn rows_follow_input_order_and_are_deterministic() {
        let opts = ReportOptions::default();
        let r1 = build_report(&inputs(), &opts).unwrap();
        let r2 = build_report(&inputs(), &opts).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(
            r1.rows.iter().map(|r| r.name.as_str()).collect::<Vec<_>>(),
            ["a", "b", "c"]
        );
        assert_eq!(r1.to_csv(), r2.to_csv());
        for row in &r1.rows {
            assert!(row.apack_payload_bits as f64 >= row.entropy_bits);
            assert!(row.apack_bits > row.apack_payload_bits);
        }
    }

    #[test]
    fn csv_layout() {
        let r = build_report(&inputs()[..1], &ReportOptions::default()).unwrap();
        let csv = r.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], CSV_COLUMNS.join(","));
        assert_eq!(lines[1].split(',').count(), CSV_COLUMNS.len());
        assert!(lines[2].starts_with("geomean,"));
        assert_eq!(lines[2].split(',').count(), CSV_COLUMNS.len());
        assert_eq!(csv_field("x,y"), "\"x,y\"");
    }

    #[test]
    fn activations_share_tables_across_samples() {
        let opts = ReportOptions {
            mode: TableMode::Activations,
            samples_per_table: 3,
            ..ReportOptions::default()
        };
        let r = build_report(&inputs(), &opts).unwrap();
        assert_eq!(r.rows.len(), 3);
        assert!(r.to_text().contains("geomean"));
    }

    #[test]
    fn geomean_of_equal_values() {
        assert!((geomean([2.0, 2.0, 2.0].into_iter()) - 2.0).abs() < 1e-12);
        assert!((geomean([1.0, 4.0].into_iter()) - 2.0).abs() < 1e-12);
    }
}
