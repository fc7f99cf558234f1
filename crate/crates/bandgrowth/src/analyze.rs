//! Experiments on windows: representation growth-exponent estimation,
//! per-block minimal-constant series under an embedding, first-nonzero-row
//! scatter, and the word-independence (freeness) check.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::growth::{fit_exponent, minimal_constant, ExponentFit};
use crate::window::{BandProfile, WindowMatrix};

/// Hard cap before word enumeration switches to seeded sampling.
pub const WORD_SAMPLE_CAP: usize = 10_000;

/// Envelope profile over all evaluated words plus its log-log fit.
///
/// This estimates the growth exponent of *one given representation*; it is
/// an upper-bound witness for the algebra's growth class, never a dimension.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthEstimate {
    pub word_len: usize,
    pub window: u64,
    pub words_evaluated: usize,
    /// True when enumeration was sampled rather than exhaustive.
    pub sampled: bool,
    pub envelope: Vec<u64>,
    pub fit: ExponentFit,
}

/// Evaluates words of length `1..=max_len` over the generator windows and
/// fits the pointwise profile envelope.
///
/// With `g` generators there are `g + g^2 + ... + g^max_len` words; past
/// [`WORD_SAMPLE_CAP`] the walk switches to seeded random words and flags
/// the report.
pub fn estimate_growth<F: Field>(
    gens: &[WindowMatrix<F>],
    max_len: usize,
    seed: u64,
) -> Result<GrowthEstimate> {
    if gens.is_empty() || max_len == 0 {
        return Err(Error::OutOfRange("need generators and a positive word length".into()));
    }
    let window = gens[0].size();
    for g in gens {
        if g.size() != window || g.field().config() != gens[0].field().config() {
            return Err(Error::ConfigMismatch("estimator generators disagree".into()));
        }
    }
    let g = gens.len();
    let mut total: usize = 0;
    let mut pow = 1usize;
    for _ in 0..max_len {
        pow = pow.saturating_mul(g);
        total = total.saturating_add(pow);
    }
    let sampled = total > WORD_SAMPLE_CAP;

    let mut envelope = vec![0u64; window as usize];
    let mut absorb = |w: &WindowMatrix<F>| {
        let p = w.band_profile();
        for (slot, v) in envelope.iter_mut().zip(p.values()) {
            if *v > *slot {
                *slot = *v;
            }
        }
    };
    let mut evaluated = 0usize;

    if !sampled {
        // Depth-first over the word tree, sharing prefixes.
        let mut stack: Vec<(WindowMatrix<F>, usize)> =
            gens.iter().map(|g| (g.clone(), 1)).rev().collect();
        while let Some((prefix, len)) = stack.pop() {
            absorb(&prefix);
            evaluated += 1;
            if len < max_len {
                for gen in gens.iter().rev() {
                    stack.push((prefix.mul(gen)?, len + 1));
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        while evaluated < WORD_SAMPLE_CAP {
            let len = rng.gen_range(1..=max_len);
            let mut acc = gens[rng.gen_range(0..g)].clone();
            for _ in 1..len {
                acc = acc.mul(&gens[rng.gen_range(0..g)])?;
            }
            absorb(&acc);
            evaluated += 1;
        }
    }

    // An all-zero envelope (diagonal generators) is bounded by 0 * n^0.
    let fit = match fit_exponent(&BandProfile::from_values(envelope.clone()), 16) {
        Ok(fit) => fit,
        Err(Error::ZeroProfile) => ExponentFit { c: 0.0, s: 0.0, residual: 0.0, points: 0 },
        Err(e) => return Err(e),
    };
    Ok(GrowthEstimate {
        word_len: max_len,
        window,
        words_evaluated: evaluated,
        sampled,
        envelope,
        fit,
    })
}

/// Images of the block-structure data under some embedding: the diagonal
/// matrix units of each block and the cross recipe into the next block.
pub trait Embedding<F: Field> {
    fn name(&self) -> &str;
    /// Image of the `i`-th standard primitive idempotent of block `k`.
    fn unit_image(&self, k: u64, i: u64) -> Result<WindowMatrix<F>>;
    /// Image of the cross recipe from block `k` to block `k + 1`.
    fn cross_image(&self, k: u64) -> Result<WindowMatrix<F>>;
    /// Block sizes available.
    fn block_size(&self, k: u64) -> u64;
}

/// The identity embedding of the block data: units sit at their natural
/// diagonal positions, the cross recipe at `(b_{k+1}, b_k)`.
pub struct IdentityEmbedding<F: Field> {
    field: F,
    bs: std::sync::Arc<crate::construct::BlockStructure>,
    window: u64,
}

impl<F: Field> IdentityEmbedding<F> {
    pub fn new(
        field: F,
        bs: std::sync::Arc<crate::construct::BlockStructure>,
        window: u64,
    ) -> IdentityEmbedding<F> {
        IdentityEmbedding { field, bs, window }
    }
}

impl<F: Field> Embedding<F> for IdentityEmbedding<F> {
    fn name(&self) -> &str {
        "identity"
    }

    fn unit_image(&self, k: u64, i: u64) -> Result<WindowMatrix<F>> {
        let p = self.bs.start(k) + i - 1;
        if p > self.window {
            return Err(Error::WindowExhausted {
                window: self.window,
                context: format!("unit ({k}, {i}) sits at {p}"),
            });
        }
        Ok(WindowMatrix::unit(self.field.clone(), self.window, p, p))
    }

    fn cross_image(&self, k: u64) -> Result<WindowMatrix<F>> {
        let (from, to) = (self.bs.start(k), self.bs.start(k + 1));
        if to > self.window {
            return Err(Error::WindowExhausted {
                window: self.window,
                context: format!("cross {k} reaches {to}"),
            });
        }
        Ok(WindowMatrix::unit(self.field.clone(), self.window, to, from))
    }

    fn block_size(&self, k: u64) -> u64 {
        self.bs.size(k)
    }
}

/// The stretched embedding: units at the stretched placements, the cross
/// recipe linking consecutive placed starts.
pub struct StretchedEmbedding<F: Field> {
    field: F,
    bs: std::sync::Arc<crate::construct::BlockStructure>,
    stretch: crate::construct::StretchEmbedding,
    window: u64,
}

impl<F: Field> StretchedEmbedding<F> {
    pub fn new(
        field: F,
        bs: std::sync::Arc<crate::construct::BlockStructure>,
        stretch: crate::construct::StretchEmbedding,
        window: u64,
    ) -> StretchedEmbedding<F> {
        StretchedEmbedding { field, bs, stretch, window }
    }
}

impl<F: Field> Embedding<F> for StretchedEmbedding<F> {
    fn name(&self) -> &str {
        "stretched"
    }

    fn unit_image(&self, k: u64, i: u64) -> Result<WindowMatrix<F>> {
        let p = self.stretch.placements()[k as usize - 1] + i - 1;
        if p > self.window {
            return Err(Error::WindowExhausted {
                window: self.window,
                context: format!("stretched unit ({k}, {i}) sits at {p}"),
            });
        }
        Ok(WindowMatrix::unit(self.field.clone(), self.window, p, p))
    }

    fn cross_image(&self, k: u64) -> Result<WindowMatrix<F>> {
        let from = self.stretch.placements()[k as usize - 1];
        let to = self.stretch.placements()[k as usize];
        if to > self.window {
            return Err(Error::WindowExhausted {
                window: self.window,
                context: format!("stretched cross {k} reaches {to}"),
            });
        }
        Ok(WindowMatrix::unit(self.field.clone(), self.window, to, from))
    }

    fn block_size(&self, k: u64) -> u64 {
        self.bs.size(k)
    }
}

/// Minimal constants `c_k` making `c_k n^s` a growth curve for every image
/// of block `k`'s idempotent family and the outgoing cross recipe.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstantsSeries {
    pub s: f64,
    /// Raw per-block maxima.
    pub raw: Vec<f64>,
    /// Running maximum of `raw` (the nondecreasing series).
    pub c: Vec<f64>,
    /// Per-block constant from idempotent images alone.
    pub idempotent_part: Vec<f64>,
    /// Per-block constant from the cross recipe alone.
    pub cross_part: Vec<f64>,
    /// Ratio of `c_k` against `(log2(k+1))^(2/(1-s))`, an informational
    /// trend, not a promise.
    pub log_ratio: Vec<f64>,
}

pub fn constants_series<F: Field>(
    theta: &dyn Embedding<F>,
    s: f64,
    k_max: u64,
) -> Result<ConstantsSeries> {
    if !(0.0..1.0).contains(&s) {
        return Err(Error::ExponentOutOfRange(format!("s = {s} not in [0, 1)")));
    }
    let mut raw = Vec::with_capacity(k_max as usize);
    let mut idem = Vec::with_capacity(k_max as usize);
    let mut cross = Vec::with_capacity(k_max as usize);
    for k in 1..=k_max {
        let mut ci = 0.0f64;
        for i in 1..=theta.block_size(k) {
            let img = theta.unit_image(k, i)?;
            if img.first_nonzero_row().is_none() {
                return Err(Error::NotAnIdempotentImage(format!("block {k} member {i}")));
            }
            ci = ci.max(minimal_constant(&img, s));
        }
        let cx = minimal_constant(&theta.cross_image(k)?, s);
        idem.push(ci);
        cross.push(cx);
        raw.push(ci.max(cx));
    }
    let mut c = Vec::with_capacity(raw.len());
    let mut run = 0.0f64;
    for &v in &raw {
        run = run.max(v);
        c.push(run);
    }
    let exponent = 2.0 / (1.0 - s);
    let log_ratio = c
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let k = i as f64 + 1.0;
            v / (k + 1.0).log2().powf(exponent).max(1e-12)
        })
        .collect();
    Ok(ConstantsSeries { s, raw, c, idempotent_part: idem, cross_part: cross, log_ratio })
}

/// First nonzero rows of the images of one block's idempotent family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScatterReport {
    pub k: u64,
    pub positions: Vec<u64>,
    pub min_gap: u64,
    pub max_position: u64,
}

pub fn scatter_report<F: Field>(theta: &dyn Embedding<F>, k: u64) -> Result<ScatterReport> {
    let n_k = theta.block_size(k);
    let mut positions = Vec::with_capacity(n_k as usize);
    for i in 1..=n_k {
        let img = theta.unit_image(k, i)?;
        let row = img
            .first_nonzero_row()
            .ok_or_else(|| Error::NotAnIdempotentImage(format!("block {k} member {i}")))?;
        positions.push(row);
    }
    let mut sorted = positions.clone();
    sorted.sort_unstable();
    let min_gap = sorted.windows(2).map(|w| w[1] - w[0]).min().unwrap_or(0);
    let max_position = sorted.last().copied().unwrap_or(0);
    Ok(ScatterReport { k, positions, min_gap, max_position })
}

/// Verdict of the word-independence check for two windows.
#[derive(Debug, Clone)]
pub struct FreenessOutcome<F: Field> {
    /// True iff all words of length `<= max_len` evaluate independently.
    pub independent: bool,
    pub rank: usize,
    pub words: usize,
    pub max_len: usize,
    /// Rows `1..=used_rows` of each evaluation entered the rank computation.
    pub used_rows: u64,
    /// On dependence: word labels over `{x, y}` with coefficients summing to
    /// the exact zero window.
    pub witness: Option<Vec<(String, F::Elem)>>,
}

/// Tests whether all words in `x`, `y` of length up to `max_len` (the empty
/// word included) are linearly independent, by exact rank over the common
/// valid region. On failure the first dependency found is returned as a
/// witness relation.
pub fn freeness_check<F: Field>(
    x: &WindowMatrix<F>,
    y: &WindowMatrix<F>,
    max_len: usize,
) -> Result<FreenessOutcome<F>> {
    let n = x.size();
    if y.size() != n || y.field().config() != x.field().config() {
        return Err(Error::ConfigMismatch("freeness operands disagree".into()));
    }
    let needed = 1u64 << (max_len as u32 + 1);
    if n < needed {
        return Err(Error::WindowExhausted {
            window: n,
            context: format!("freeness at length {max_len} needs a window of at least {needed}"),
        });
    }
    let field = x.field().clone();

    // Words in length-then-lexicographic order, sharing prefix products.
    let mut words: Vec<(String, WindowMatrix<F>)> =
        vec![("1".into(), WindowMatrix::identity(field.clone(), n))];
    let mut frontier: Vec<(String, WindowMatrix<F>)> = words.clone();
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(frontier.len() * 2);
        for (label, w) in &frontier {
            let base = if label == "1" { String::new() } else { label.clone() };
            next.push((format!("{base}x"), w.mul(x)?));
            next.push((format!("{base}y"), w.mul(y)?));
        }
        words.extend(next.iter().cloned());
        frontier = next;
    }
    let used_rows = words.iter().map(|(_, w)| w.valid_to()).min().unwrap_or(0);
    if used_rows == 0 {
        return Err(Error::WindowExhausted {
            window: n,
            context: "no exact rows survive the word products".into(),
        });
    }

    // Rank over a row prefix first: full prefix rank certifies independence
    // outright (more coordinates never lower the rank), and a dependency
    // candidate is verified on the whole exact region before being
    // believed. Only an unverified candidate escalates to the full region.
    let mut budget = used_rows.min(32).max(1);
    loop {
        let (rank, witness) = echelon_rank(&field, n, &words, budget)?;
        match witness {
            None => {
                return Ok(FreenessOutcome {
                    independent: true,
                    rank,
                    words: words.len(),
                    max_len,
                    used_rows,
                    witness: None,
                });
            }
            Some(w) => {
                let zero = {
                    let mut acc = WindowMatrix::zero(field.clone(), n);
                    for (idx, c) in &w {
                        acc = acc.add(&words[*idx].1.scale(c))?;
                    }
                    acc.is_zero_on_rows(used_rows)
                };
                if zero {
                    let witness =
                        w.into_iter().map(|(i, c)| (words[i].0.clone(), c)).collect::<Vec<_>>();
                    return Ok(FreenessOutcome {
                        independent: false,
                        rank,
                        words: words.len(),
                        max_len,
                        used_rows,
                        witness: Some(witness),
                    });
                }
                debug_assert!(budget < used_rows, "full-region dependency must verify");
                budget = used_rows;
            }
        }
    }
}

type RankOutcome<F> = (usize, Option<Vec<(usize, <F as Field>::Elem)>>);

/// Incremental echelon over flattened rows `1..=rows`, tracking the word
/// combination of each basis vector; returns the first dependency found.
fn echelon_rank<F: Field>(
    field: &F,
    n: u64,
    words: &[(String, WindowMatrix<F>)],
    rows: u64,
) -> Result<RankOutcome<F>> {
    struct Row<F: Field> {
        lead: u64,
        vec: Vec<(u64, F::Elem)>,
        combo: Vec<(usize, F::Elem)>,
    }
    let flatten = |w: &WindowMatrix<F>| -> Vec<(u64, F::Elem)> {
        w.entries()
            .filter(|(i, _, _)| *i <= rows)
            .map(|(i, j, v)| ((i - 1) * n + (j - 1), v.clone()))
            .collect()
    };
    let mut basis: Vec<Row<F>> = Vec::new();
    let mut rank = 0usize;
    for (idx, (_, w)) in words.iter().enumerate() {
        let mut vec = flatten(w);
        let mut combo: Vec<(usize, F::Elem)> = vec![(idx, field.one())];
        loop {
            let Some(&(lead, ref lead_val)) = vec.first() else {
                return Ok((rank, Some(combo)));
            };
            let lead_val = lead_val.clone();
            match basis.iter().position(|r| r.lead == lead) {
                None => {
                    basis.push(Row { lead, vec, combo });
                    rank += 1;
                    break;
                }
                Some(p) => {
                    // vec -= (lead_val / pivot) * basis[p]
                    let pivot_val = basis[p].vec[0].1.clone();
                    let f = field.div(&lead_val, &pivot_val)?;
                    vec = sub_scaled(field, &vec, &basis[p].vec, &f);
                    let extra: Vec<(usize, F::Elem)> = basis[p]
                        .combo
                        .iter()
                        .map(|(i, c)| (*i, field.neg(&field.mul(&f, c))))
                        .collect();
                    combo = merge_combo(field, combo, extra);
                }
            }
        }
    }
    Ok((rank, None))
}

fn sub_scaled<F: Field>(
    field: &F,
    a: &[(u64, F::Elem)],
    b: &[(u64, F::Elem)],
    f: &F::Elem,
) -> Vec<(u64, F::Elem)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0usize, 0usize);
    while i < a.len() || j < b.len() {
        let take_a = j >= b.len() || (i < a.len() && a[i].0 <= b[j].0);
        let take_b = i >= a.len() || (j < b.len() && b[j].0 <= a[i].0);
        if take_a && take_b {
            let v = field.sub(&a[i].1, &field.mul(f, &b[j].1));
            if !field.is_zero(&v) {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        } else if take_a {
            out.push(a[i].clone());
            i += 1;
        } else {
            let v = field.neg(&field.mul(f, &b[j].1));
            if !field.is_zero(&v) {
                out.push((b[j].0, v));
            }
            j += 1;
        }
    }
    out
}

fn merge_combo<F: Field>(
    field: &F,
    mut a: Vec<(usize, F::Elem)>,
    b: Vec<(usize, F::Elem)>,
) -> Vec<(usize, F::Elem)> {
    a.extend(b);
    a.sort_by_key(|(i, _)| *i);
    let mut out: Vec<(usize, F::Elem)> = Vec::with_capacity(a.len());
    for (i, c) in a {
        if let Some(last) = out.last_mut() {
            if last.0 == i {
                last.1 = field.add(&last.1, &c);
                continue;
            }
        }
        out.push((i, c));
    }
    out.retain(|(_, c)| !field.is_zero(c));
    out
}

/// Re-evaluates a witness relation and checks it sums to the exact zero
/// window on the stated rows.
pub fn verify_witness<F: Field>(
    x: &WindowMatrix<F>,
    y: &WindowMatrix<F>,
    witness: &[(String, F::Elem)],
    rows: u64,
) -> Result<bool> {
    let field = x.field().clone();
    let n = x.size();
    let mut acc = WindowMatrix::zero(field.clone(), n);
    for (label, coeff) in witness {
        let mut w = WindowMatrix::identity(field.clone(), n);
        if label != "1" {
            for ch in label.chars() {
                w = match ch {
                    'x' => w.mul(x)?,
                    'y' => w.mul(y)?,
                    _ => return Err(Error::Parse(format!("bad witness label `{label}`"))),
                };
            }
        }
        acc = acc.add(&w.scale(coeff))?;
    }
    Ok(acc.is_zero_on_rows(rows))
}
