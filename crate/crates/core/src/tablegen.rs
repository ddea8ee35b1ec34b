//! Profile-driven table construction.
//!
//! A local search moves the row boundaries (`v_min`) one step at a time and
//! keeps any configuration that lowers the estimated footprint: per-range
//! entropy of the symbol stream plus the verbatim offset bits. Counts are then
//! distributed over `[0, 0x3FF]` in proportion to the mass of each range.

use crate::codetable::{bit_width, CodeTable, Histogram, COUNT_BITS, COUNT_MAX, ROWS};
use crate::error::{Error, Result};

/// Sixteen strictly increasing row lower bounds starting at 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    v_mins: [u8; ROWS],
}

impl Partition {
    pub fn new(v_mins: [u8; ROWS]) -> Result<Self> {
        if v_mins[0] != 0 || v_mins.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::TableInvalid {
                reason: format!("partition {v_mins:?} is not strictly increasing from 0"),
            });
        }
        Ok(Partition { v_mins })
    }

    /// Equal-width split: 0, 16, 32, ..., 240.
    pub fn uniform() -> Self {
        Partition {
            v_mins: std::array::from_fn(|i| (i * 256 / ROWS) as u8),
        }
    }

    pub fn v_mins(&self) -> [u8; ROWS] {
        self.v_mins
    }

    /// Inclusive `(v_min, v_max)` of each row.
    pub fn ranges(&self) -> impl Iterator<Item = (u8, u8)> + '_ {
        (0..ROWS).map(move |i| {
            let hi = self.v_mins.get(i + 1).map_or(255, |&n| n - 1);
            (self.v_mins[i], hi)
        })
    }
}

impl From<&CodeTable> for Partition {
    fn from(t: &CodeTable) -> Self {
        Partition { v_mins: t.v_mins() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchConfig {
    pub depth_max: u32,
    /// Stop once a round keeps at least this fraction of the previous size.
    pub threshold: f64,
    /// How far from `around` a nested search may move boundaries.
    pub neighborhood: usize,
    pub count_bits: u32,
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let reason = if self.depth_max < 1 {
            "depth_max must be at least 1"
        } else if !(self.threshold > 0.0 && self.threshold < 1.0) {
            "threshold must lie strictly between 0 and 1"
        } else if self.count_bits != COUNT_BITS {
            "only 10-bit probability counts are supported"
        } else {
            return Ok(());
        };
        Err(Error::TableInvalid {
            reason: reason.to_string(),
        })
    }
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            depth_max: 2,
            threshold: 0.99,
            neighborhood: 1,
            count_bits: 10,
        }
    }
}

/// Whether a table is built for static weights or for profiled activations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TableMode {
    /// Zero-count rows are kept: the data is known exactly.
    Weights,
    /// Every row gets at least one count so unseen values stay encodable.
    Activations,
}

/// Cumulative histogram for O(1) range sums.
struct SizeModel {
    prefix: [u64; 257],
    total: f64,
}

impl SizeModel {
    fn new(h: &Histogram) -> Result<Self> {
        if h.is_empty() {
            return Err(Error::EmptyHistogram);
        }
        let mut prefix = [0u64; 257];
        for (i, &n) in h.buckets().iter().enumerate() {
            prefix[i + 1] = prefix[i] + n;
        }
        Ok(SizeModel {
            prefix,
            total: h.total() as f64,
        })
    }

    fn size(&self, v_mins: &[u8; ROWS]) -> f64 {
        let mut bits = 0.0;
        for i in 0..ROWS {
            let lo = v_mins[i] as usize;
            let hi = v_mins.get(i + 1).map_or(256, |&n| n as usize);
            let n = self.prefix[hi] - self.prefix[lo];
            if n == 0 {
                continue;
            }
            let n = n as f64;
            let offset_bits = bit_width((hi - 1 - lo) as u32) as f64;
            bits += n * ((self.total / n).log2() + offset_bits);
        }
        bits
    }
}

/// Estimated footprint in bits of coding `h` with partition `p`: per-range
/// entropy of the row symbols plus each range's offset width.
pub fn encoded_size(h: &Histogram, p: &Partition) -> Result<f64> {
    Ok(SizeModel::new(h)?.size(&p.v_mins))
}

/// One round of boundary search starting from `p` whose size is `minsize`.
///
/// With `around == None` every row boundary is walked down to just above its
/// predecessor and up to just below its successor. While `depth` is below
/// `cfg.depth_max` each step nests a search over the neighbouring rows
/// instead of scoring the candidate directly. Returns the best partition seen
/// and its size; the input is returned unchanged if nothing beats `minsize`.
pub fn search(
    h: &Histogram,
    p: &Partition,
    minsize: f64,
    depth: u32,
    around: Option<usize>,
    cfg: &SearchConfig,
) -> Result<(Partition, f64)> {
    let model = SizeModel::new(h)?;
    Ok(search_with(&model, *p, minsize, depth, around, cfg))
}

fn search_with(
    model: &SizeModel,
    p: Partition,
    mut minsize: f64,
    depth: u32,
    around: Option<usize>,
    cfg: &SearchConfig,
) -> (Partition, f64) {
    let mut best = p;
    let mut trial = p.v_mins;
    let visit = |trial: &[u8; ROWS], row: usize, best: &mut Partition, minsize: &mut f64| {
        let candidate = Partition { v_mins: *trial };
        if depth < cfg.depth_max {
            let (found, size) = search_with(model, candidate, *minsize, depth + 1, Some(row), cfg);
            if size < *minsize {
                *best = found;
                *minsize = size;
            }
        } else {
            let size = model.size(trial);
            if size < *minsize {
                *best = candidate;
                *minsize = size;
            }
        }
    };
    // Row 0 is pinned at 0 so the partition always covers the value space.
    for row in 1..ROWS {
        if let Some(a) = around {
            let d = row.abs_diff(a);
            if d == 0 || d > cfg.neighborhood {
                continue;
            }
        }
        let saved = trial[row];
        let lowest = trial[row - 1] + 1;
        while trial[row] > lowest {
            trial[row] -= 1;
            visit(&trial, row, &mut best, &mut minsize);
        }
        trial[row] = saved;
        let highest = trial.get(row + 1).map_or(255, |&n| n - 1);
        while trial[row] < highest {
            trial[row] += 1;
            visit(&trial, row, &mut best, &mut minsize);
        }
        trial[row] = saved;
    }
    (best, minsize)
}

/// Repeats [`search`] from the uniform partition until a round improves the
/// estimate by less than `1 - threshold`. Also returns the estimate after
/// every round, starting with the uniform partition's.
pub fn find_partition_traced(h: &Histogram, cfg: &SearchConfig) -> Result<(Partition, Vec<f64>)> {
    cfg.validate()?;
    let model = SizeModel::new(h)?;
    let mut p = Partition::uniform();
    let mut size = model.size(&p.v_mins);
    let mut trace = vec![size];
    loop {
        let (next, newsize) = search_with(&model, p, size, 1, None, cfg);
        p = next;
        trace.push(newsize);
        if size == 0.0 || newsize / size >= cfg.threshold {
            break;
        }
        size = newsize;
    }
    Ok((p, trace))
}

pub fn find_partition(h: &Histogram, cfg: &SearchConfig) -> Result<Partition> {
    find_partition_traced(h, cfg).map(|(p, _)| p)
}

/// Splits the 0x3FF count mass across rows in proportion to their frequency.
///
/// Rounding is largest-remainder with ties going to the lower row; any row
/// that saw at least one value gets at least one count.
pub fn assign_counts(h: &Histogram, p: &Partition, mode: TableMode) -> Result<CodeTable> {
    if h.is_empty() {
        return Err(Error::EmptyHistogram);
    }
    let total = h.total() as u128;
    let budget = COUNT_MAX as u128;
    let mass: Vec<u64> = p
        .ranges()
        .map(|(lo, hi)| (lo..=hi).map(|v| h.get(v)).sum())
        .collect();

    let mut counts = [0u32; ROWS];
    let mut remainders = [0u128; ROWS];
    let mut raised = [false; ROWS];
    for r in 0..ROWS {
        let scaled = mass[r] as u128 * budget;
        counts[r] = (scaled / total) as u32;
        remainders[r] = scaled % total;
        if mass[r] > 0 && counts[r] == 0 {
            counts[r] = 1;
            raised[r] = true;
        }
    }
    let assigned: u32 = counts.iter().sum();
    let budget = COUNT_MAX as u32;
    if assigned < budget {
        let mut order: Vec<usize> = (0..ROWS).filter(|&r| mass[r] > 0 && !raised[r]).collect();
        order.sort_by(|&a, &b| remainders[b].cmp(&remainders[a]).then(a.cmp(&b)));
        for k in 0..(budget - assigned) as usize {
            counts[order[k % order.len()]] += 1;
        }
    } else {
        for _ in 0..assigned - budget {
            let r = argmax(&counts);
            counts[r] -= 1;
        }
    }

    let table = CodeTable::from_counts(p.v_mins, counts.map(|c| c as u16))?;
    match mode {
        TableMode::Weights => Ok(table),
        TableMode::Activations => adjust_for_activations(&table),
    }
}

/// Lowest index among the largest entries.
fn argmax(counts: &[u32; ROWS]) -> usize {
    let mut best = 0;
    for r in 1..ROWS {
        if counts[r] > counts[best] {
            best = r;
        }
    }
    best
}

/// Gives every zero-count row one count, taken each time from the row that
/// currently holds the most.
pub fn adjust_for_activations(table: &CodeTable) -> Result<CodeTable> {
    let mut counts = table.counts().map(u32::from);
    let total: u32 = counts.iter().sum();
    if (total as usize) < ROWS {
        return Err(Error::ImpossibleAdjustment { total });
    }
    for r in 0..ROWS {
        if counts[r] == 0 {
            let donor = argmax(&counts);
            counts[donor] -= 1;
            counts[r] = 1;
        }
    }
    CodeTable::from_counts(table.v_mins(), counts.map(|c| c as u16))
}

/// Partition search followed by count assignment.
pub fn build_table(h: &Histogram, mode: TableMode, cfg: &SearchConfig) -> Result<CodeTable> {
    let p = find_partition(h, cfg)?;
    assign_counts(h, &p, mode)
}
