//! Permutations, pairings and their crossing statistics.
//!
//! Points and permutation values are 1-based throughout the public API, so a
//! pairing of `{1, ..., 2k}` prints as `[[1,4],[2,3]]`.
//!
//! Pairings are enumerated depth-first by always matching the smallest
//! uncovered point, which fixes a canonical order. Crossings are counted
//! incrementally: when `(a, b)` is placed, every earlier pair has its left end
//! below `a`, so the new crossings are exactly the covered points strictly
//! between `a` and `b`.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{contract, Error, Result};
use crate::qalgebra::{q_binomial, q_factorial, QPoly, Rational};

/// Largest point count the pairing enumerators accept by default.
pub const DEFAULT_PAIRING_CAP: usize = 20;
/// Largest `n` for which sums over the full symmetric group are enumerated.
pub const DEFAULT_PERMUTATION_CAP: usize = 9;

/// Hard limit on the number of points in any pairing enumeration.
pub const MAX_POINTS: usize = 64;

/// Number of pairs `i < j` with `values[i] > values[j]`.
pub fn count_inversions(values: &[usize]) -> usize {
    let mut inv = 0;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            if values[i] > values[j] {
                inv += 1;
            }
        }
    }
    inv
}

/// A bijection of `{1, ..., n}` with its inversion count.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
    inversions: usize,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &v in &images {
            if v == 0 || v > n || seen[v - 1] {
                return contract(format!("{images:?} is not a permutation of 1..={n}"));
            }
            seen[v - 1] = true;
        }
        let inversions = count_inversions(&images);
        Ok(Permutation { images, inversions })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (1..=n).collect(),
            inversions: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// `sigma(i)` for 1-based `i`.
    pub fn apply(&self, i: usize) -> usize {
        self.images[i - 1]
    }

    pub fn inversions(&self) -> usize {
        self.inversions
    }
}

/// All permutations of `{1, ..., n}` in lexicographic order.
pub fn permutations(n: usize) -> Permutations {
    Permutations {
        current: Some((1..=n).collect()),
    }
}

pub struct Permutations {
    current: Option<Vec<usize>>,
}

impl Iterator for Permutations {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        let images = self.current.take()?;
        let mut next = images.clone();
        if next_permutation(&mut next) {
            self.current = Some(next);
        }
        let inversions = count_inversions(&images);
        Some(Permutation { images, inversions })
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// A strictly decreasing map `{1..p} -> {1..n}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DecreasingInjection {
    images: Vec<usize>,
    ambient: usize,
}

impl DecreasingInjection {
    pub fn new(images: Vec<usize>, ambient: usize) -> Result<Self> {
        let in_range = images.iter().all(|&v| v >= 1 && v <= ambient);
        let decreasing = images.windows(2).all(|w| w[0] > w[1]);
        if !in_range || !decreasing {
            return contract(format!(
                "{images:?} is not a decreasing map into 1..={ambient}"
            ));
        }
        Ok(DecreasingInjection { images, ambient })
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    /// `sum_i (n + 1 - sigma(i)) - p(p+1)/2`.
    pub fn alpha(&self) -> usize {
        let p = self.images.len();
        let total: usize = self.images.iter().map(|&v| self.ambient + 1 - v).sum();
        total - p * (p + 1) / 2
    }
}

/// All decreasing maps `{1..p} -> {1..n}`.
pub fn decreasing_injections(p: usize, n: usize) -> Vec<DecreasingInjection> {
    let mut out = Vec::new();
    let mut chosen = Vec::with_capacity(p);
    fn rec(
        next_max: usize,
        p: usize,
        n: usize,
        chosen: &mut Vec<usize>,
        out: &mut Vec<DecreasingInjection>,
    ) {
        if chosen.len() == p {
            out.push(DecreasingInjection {
                images: chosen.clone(),
                ambient: n,
            });
            return;
        }
        let remaining = p - chosen.len();
        for v in (remaining..=next_max).rev() {
            chosen.push(v);
            rec(v - 1, p, n, chosen, out);
            chosen.pop();
        }
    }
    if p <= n {
        rec(n, p, n, &mut chosen, &mut out);
    }
    out
}

/// An injective map `{1..p} -> {1..n}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Injection {
    images: Vec<usize>,
    ambient: usize,
}

impl Injection {
    pub fn new(images: Vec<usize>, ambient: usize) -> Result<Self> {
        let mut seen = vec![false; ambient + 1];
        for &v in &images {
            if v == 0 || v > ambient || seen[v] {
                return contract(format!("{images:?} is not injective into 1..={ambient}"));
            }
            seen[v] = true;
        }
        Ok(Injection { images, ambient })
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn inversions(&self) -> usize {
        count_inversions(&self.images)
    }

    /// `sum_i sigma(i) - p(p+1)/2 + inv(sigma)`.
    pub fn beta(&self) -> usize {
        let p = self.images.len();
        let total: usize = self.images.iter().sum();
        total - p * (p + 1) / 2 + self.inversions()
    }
}

/// All injective maps `{1..p} -> {1..n}`.
pub fn injections(p: usize, n: usize) -> Vec<Injection> {
    let mut out = Vec::new();
    let mut chosen = Vec::with_capacity(p);
    let mut used = vec![false; n + 1];
    fn rec(
        p: usize,
        n: usize,
        chosen: &mut Vec<usize>,
        used: &mut [bool],
        out: &mut Vec<Injection>,
    ) {
        if chosen.len() == p {
            out.push(Injection {
                images: chosen.clone(),
                ambient: n,
            });
            return;
        }
        for v in 1..=n {
            if !used[v] {
                used[v] = true;
                chosen.push(v);
                rec(p, n, chosen, used, out);
                chosen.pop();
                used[v] = false;
            }
        }
    }
    if p <= n {
        rec(p, n, &mut chosen, &mut used, &mut out);
    }
    out
}

/// A perfect matching of `{1, ..., 2k}` with its crossing number.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Pairing {
    /// Sorted by left endpoint; each pair is `(left, right)` with `left < right`.
    pairs: Vec<(usize, usize)>,
    crossings: usize,
}

impl Pairing {
    /// Builds a pairing from 1-based pairs, validating that they cover
    /// `{1, ..., 2k}` exactly once.
    pub fn from_pairs(pairs: &[(usize, usize)]) -> Result<Self> {
        let points = 2 * pairs.len();
        let mut seen = vec![false; points + 1];
        let mut sorted = Vec::with_capacity(pairs.len());
        for &(x, y) in pairs {
            let (a, b) = if x < y { (x, y) } else { (y, x) };
            for v in [a, b] {
                if v == 0 || v > points || seen[v] {
                    return contract(format!("{pairs:?} is not a pairing of 1..={points}"));
                }
                seen[v] = true;
            }
            sorted.push((a, b));
        }
        sorted.sort_unstable();
        let crossings = crossing_number_of(&sorted);
        Ok(Pairing {
            pairs: sorted,
            crossings,
        })
    }

    /// Builds from a 0-based partner table; the caller vouches for validity.
    fn from_partners(partner: &[usize], crossings: usize) -> Self {
        let pairs = partner
            .iter()
            .enumerate()
            .filter(|&(a, &b)| a < b)
            .map(|(a, &b)| (a + 1, b + 1))
            .collect();
        Pairing { pairs, crossings }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn points(&self) -> usize {
        2 * self.pairs.len()
    }

    pub fn crossings(&self) -> usize {
        self.crossings
    }

    /// Partner of a 1-based point.
    pub fn partner(&self, x: usize) -> Option<usize> {
        self.pairs.iter().find_map(|&(a, b)| {
            if a == x {
                Some(b)
            } else if b == x {
                Some(a)
            } else {
                None
            }
        })
    }

    /// Text form, e.g. `[[1,4],[2,8],[3,6]]`.
    pub fn to_text(&self) -> String {
        let body: Vec<String> = self
            .pairs
            .iter()
            .map(|(a, b)| format!("[{a},{b}]"))
            .collect();
        format!("[{}]", body.join(","))
    }

    pub fn parse_text(s: &str) -> Result<Self> {
        let raw: Vec<[usize; 2]> =
            serde_json::from_str(s).map_err(|e| Error::Parse(format!("pairing {s:?}: {e}")))?;
        let pairs: Vec<(usize, usize)> = raw.into_iter().map(|[a, b]| (a, b)).collect();
        Pairing::from_pairs(&pairs)
    }
}

impl fmt::Display for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn crosses(p: (usize, usize), r: (usize, usize)) -> bool {
    (p.0 < r.0 && r.0 < p.1 && p.1 < r.1) || (r.0 < p.0 && p.0 < r.1 && r.1 < p.1)
}

fn crossing_number_of(pairs: &[(usize, usize)]) -> usize {
    let mut count = 0;
    for i in 0..pairs.len() {
        for j in i + 1..pairs.len() {
            if crosses(pairs[i], pairs[j]) {
                count += 1;
            }
        }
    }
    count
}

/// Quadratic recount of the crossings of a pairing.
pub fn crossing_number(p: &Pairing) -> usize {
    crossing_number_of(&p.pairs)
}

/// The partition `n_1 (x) ... (x) n_r` of `{1..N}` into consecutive blocks.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BlockStructure {
    sizes: Vec<usize>,
    starts: Vec<usize>,
}

impl BlockStructure {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.contains(&0) {
            return contract(format!("block sizes must be positive, got {sizes:?}"));
        }
        let mut starts = Vec::with_capacity(sizes.len());
        let mut acc = 0;
        for &s in &sizes {
            starts.push(acc + 1);
            acc += s;
        }
        Ok(BlockStructure { sizes, starts })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn num_blocks(&self) -> usize {
        self.sizes.len()
    }

    pub fn total(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// 1-based points of block `i` (0-based block index).
    pub fn block(&self, i: usize) -> std::ops::Range<usize> {
        self.starts[i]..self.starts[i] + self.sizes[i]
    }

    /// 0-based block index of a 1-based point.
    pub fn block_of(&self, point: usize) -> usize {
        match self.starts.binary_search(&point) {
            Ok(i) => i,
            Err(i) => i - 1,
        }
    }

    /// Block index for every point, 0-based on both sides.
    pub fn labels(&self) -> Vec<usize> {
        self.sizes
            .iter()
            .enumerate()
            .flat_map(|(i, &s)| std::iter::repeat_n(i, s))
            .collect()
    }

    pub fn respects(&self, p: &Pairing) -> bool {
        p.points() == self.total()
            && p.pairs()
                .iter()
                .all(|&(a, b)| self.block_of(a) != self.block_of(b))
    }

    /// Number of pairs joining blocks `i` and `j`.
    pub fn links(&self, p: &Pairing, i: usize, j: usize) -> usize {
        p.pairs()
            .iter()
            .filter(|&&(a, b)| {
                let (x, y) = (self.block_of(a), self.block_of(b));
                (x == i && y == j) || (x == j && y == i)
            })
            .count()
    }
}

#[derive(Clone, Debug)]
enum Constraint {
    All,
    /// Points with equal labels may not be matched.
    DistinctLabels(Vec<usize>),
    /// Only points with equal labels may be matched.
    EqualLabels(Vec<usize>),
}

impl Constraint {
    fn allows(&self, a: usize, b: usize) -> bool {
        match self {
            Constraint::All => true,
            Constraint::DistinctLabels(l) => l[a] != l[b],
            Constraint::EqualLabels(l) => l[a] == l[b],
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Frame {
    a: usize,
    b: usize,
    added: usize,
}

/// Depth-first enumerator over pairings of `{1..n}` subject to a matching
/// constraint and an optional crossing budget.
#[derive(Clone, Debug)]
pub struct PairingIter {
    n: usize,
    constraint: Constraint,
    max_crossings: Option<usize>,
    covered: u64,
    partner: Vec<usize>,
    stack: Vec<Frame>,
    crossings: usize,
    started: bool,
    done: bool,
}

impl PairingIter {
    fn new(n: usize, constraint: Constraint, max_crossings: Option<usize>) -> Self {
        PairingIter {
            n,
            constraint,
            max_crossings,
            covered: 0,
            partner: vec![usize::MAX; n],
            stack: Vec::with_capacity(n / 2),
            crossings: 0,
            started: false,
            done: n % 2 == 1,
        }
    }

    fn empty() -> Self {
        let mut it = Self::new(0, Constraint::All, None);
        it.done = true;
        it
    }

    fn is_covered(&self, x: usize) -> bool {
        self.covered >> x & 1 == 1
    }

    fn covered_between(&self, a: usize, b: usize) -> usize {
        if b <= a + 1 {
            return 0;
        }
        let width = b - a - 1;
        let mask = if width >= 64 {
            u64::MAX
        } else {
            (1u64 << width) - 1
        };
        ((self.covered >> (a + 1)) & mask).count_ones() as usize
    }

    fn try_place(&mut self, a: usize, from: usize) -> bool {
        for b in from..self.n {
            if self.is_covered(b) || !self.constraint.allows(a, b) {
                continue;
            }
            let added = self.covered_between(a, b);
            if self
                .max_crossings
                .is_some_and(|m| self.crossings + added > m)
            {
                continue;
            }
            self.covered |= 1 << a | 1 << b;
            self.partner[a] = b;
            self.partner[b] = a;
            self.crossings += added;
            self.stack.push(Frame { a, b, added });
            if self.feasible() {
                return true;
            }
            self.unplace(Frame { a, b, added });
            self.stack.pop();
        }
        false
    }

    fn unplace(&mut self, f: Frame) {
        self.covered &= !(1 << f.a | 1 << f.b);
        self.partner[f.a] = usize::MAX;
        self.partner[f.b] = usize::MAX;
        self.crossings -= f.added;
    }

    /// Cheap necessary condition for the remaining points to be matchable.
    fn feasible(&self) -> bool {
        match &self.constraint {
            Constraint::All => true,
            Constraint::DistinctLabels(labels) => {
                let mut per_label: Vec<usize> = Vec::new();
                let mut free = 0;
                for (x, &l) in labels.iter().enumerate().take(self.n) {
                    if !self.is_covered(x) {
                        if per_label.len() <= l {
                            per_label.resize(l + 1, 0);
                        }
                        per_label[l] += 1;
                        free += 1;
                    }
                }
                per_label.iter().all(|&c| 2 * c <= free)
            }
            Constraint::EqualLabels(_) => true,
        }
    }

    fn smallest_uncovered(&self) -> Option<usize> {
        let free = !self.covered
            & if self.n == 64 {
                u64::MAX
            } else {
                (1u64 << self.n) - 1
            };
        (free != 0).then(|| free.trailing_zeros() as usize)
    }

    /// Moves to the next complete pairing; returns its crossing count.
    fn advance(&mut self) -> Option<usize> {
        if self.done {
            return None;
        }
        let mut descending = !self.started;
        self.started = true;
        loop {
            if descending {
                match self.smallest_uncovered() {
                    None => return Some(self.crossings),
                    Some(a) => {
                        if !self.try_place(a, a + 1) {
                            descending = false;
                        }
                    }
                }
            } else {
                match self.stack.pop() {
                    None => {
                        self.done = true;
                        return None;
                    }
                    Some(frame) => {
                        self.unplace(frame);
                        if self.try_place(frame.a, frame.b + 1) {
                            descending = true;
                        }
                    }
                }
            }
        }
    }

    /// Consumes the stream, returning the number of pairings per crossing count.
    pub fn crossing_histogram(mut self) -> Vec<u64> {
        let mut hist = Vec::new();
        while let Some(c) = self.advance() {
            if hist.len() <= c {
                hist.resize(c + 1, 0);
            }
            hist[c] += 1;
        }
        hist
    }
}

impl Iterator for PairingIter {
    type Item = Pairing;

    fn next(&mut self) -> Option<Pairing> {
        let c = self.advance()?;
        Some(Pairing::from_partners(&self.partner, c))
    }
}

fn check_cap(points: usize, cap: usize) -> Result<()> {
    let cap = cap.min(MAX_POINTS);
    if points > cap {
        return Err(Error::ResourceCap {
            what: "pairing points",
            requested: points,
            cap,
        });
    }
    Ok(())
}

/// All pairings of `{1..k2}`; empty for odd `k2`.
pub fn enumerate_pairings(k2: usize) -> Result<PairingIter> {
    enumerate_pairings_capped(k2, DEFAULT_PAIRING_CAP)
}

pub fn enumerate_pairings_capped(k2: usize, cap: usize) -> Result<PairingIter> {
    check_cap(k2, cap)?;
    Ok(PairingIter::new(k2, Constraint::All, None))
}

/// Crossing-free pairings of `{1..k2}`.
pub fn enumerate_noncrossing(k2: usize) -> Result<PairingIter> {
    enumerate_noncrossing_capped(k2, DEFAULT_PAIRING_CAP)
}

pub fn enumerate_noncrossing_capped(k2: usize, cap: usize) -> Result<PairingIter> {
    check_cap(k2, cap)?;
    Ok(PairingIter::new(k2, Constraint::All, Some(0)))
}

/// Pairings with no pair inside a single block.
pub fn enumerate_respecting(b: &BlockStructure) -> Result<PairingIter> {
    enumerate_respecting_capped(b, DEFAULT_PAIRING_CAP)
}

pub fn enumerate_respecting_capped(b: &BlockStructure, cap: usize) -> Result<PairingIter> {
    check_cap(b.total(), cap)?;
    Ok(PairingIter::new(
        b.total(),
        Constraint::DistinctLabels(b.labels()),
        None,
    ))
}

/// The pairing `P2(sigma) = {(n+1-i, n+sigma(i))}` of `n (x) n`.
pub fn p2_of_permutation(s: &Permutation) -> Pairing {
    let n = s.len();
    let pairs: Vec<(usize, usize)> = (1..=n).map(|i| (n + 1 - i, n + s.apply(i))).collect();
    Pairing::from_pairs(&pairs).expect("P2(sigma) is a pairing")
}

/// One colour class of a coloured pairing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColorClass {
    pub color: usize,
    pub pairs: Vec<(usize, usize)>,
}

/// A pairing of the labels `{1..r}` joining only equal sizes, grouped by colour
/// in increasing colour order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColoredPairing {
    pub pairing: Pairing,
    pub classes: Vec<ColorClass>,
}

/// Stream of coloured pairings for the size list `(n_1, ..., n_r)`.
pub struct ColoredIter {
    sizes: Vec<usize>,
    colors: Vec<usize>,
    inner: PairingIter,
}

impl Iterator for ColoredIter {
    type Item = ColoredPairing;

    fn next(&mut self) -> Option<ColoredPairing> {
        let pairing = self.inner.next()?;
        let classes = self
            .colors
            .iter()
            .map(|&color| ColorClass {
                color,
                pairs: pairing
                    .pairs()
                    .iter()
                    .copied()
                    .filter(|&(a, _)| self.sizes[a - 1] == color)
                    .collect(),
            })
            .collect();
        Some(ColoredPairing { pairing, classes })
    }
}

pub fn enumerate_colored(sizes: &[usize]) -> Result<ColoredIter> {
    check_cap(sizes.len(), DEFAULT_PAIRING_CAP)?;
    let mut colors: Vec<usize> = sizes.to_vec();
    colors.sort_unstable();
    colors.dedup();
    let odd_class = colors
        .iter()
        .any(|c| sizes.iter().filter(|&&s| s == *c).count() % 2 == 1);
    let inner = if odd_class {
        PairingIter::empty()
    } else {
        PairingIter::new(sizes.len(), Constraint::EqualLabels(sizes.to_vec()), None)
    };
    Ok(ColoredIter {
        sizes: sizes.to_vec(),
        colors,
        inner,
    })
}

/// Crossings in `p` between a pair of `first` and a pair of `second`; when the
/// two sets coincide, each unordered crossing is counted once.
pub fn cross_color_crossings(
    p: &Pairing,
    first: &[(usize, usize)],
    second: &[(usize, usize)],
) -> Result<usize> {
    let norm = |&(x, y): &(usize, usize)| if x < y { (x, y) } else { (y, x) };
    let first: Vec<_> = first.iter().map(norm).collect();
    let second: Vec<_> = second.iter().map(norm).collect();
    for pr in first.iter().chain(&second) {
        if !p.pairs().contains(pr) {
            return contract(format!("{pr:?} is not a pair of {p}"));
        }
    }
    let mut count = 0;
    for a in &first {
        for b in &second {
            if crosses(*a, *b) {
                count += 1;
            }
        }
    }
    let mut same = first.clone();
    let mut other = second.clone();
    same.sort_unstable();
    other.sort_unstable();
    if same == other {
        count /= 2;
    }
    Ok(count)
}

/// `sum over P2(k2) of q^Cr`, the even moment of the standard q-Gaussian law,
/// by enumeration. Odd `k2` gives the zero polynomial.
pub fn gaussian_moment(k2: usize) -> Result<QPoly> {
    if k2 % 2 == 1 {
        return Ok(QPoly::zero());
    }
    Ok(QPoly::from_counts(
        &enumerate_pairings(k2)?.crossing_histogram(),
    ))
}

/// The same polynomial as [`gaussian_moment`], as the weighted count of Dyck
/// paths where a down-step from height `h` carries weight `[h]_q`.
pub fn gaussian_moment_fast(k2: usize) -> QPoly {
    if k2 % 2 == 1 {
        return QPoly::zero();
    }
    // layer[h] holds the coefficient list of the paths ending at height h
    let mut layer: Vec<Vec<BigUint>> = vec![vec![BigUint::one()]];
    for step in 0..k2 {
        let max_height = (step + 1).min(k2 - step - 1);
        let mut next: Vec<Vec<BigUint>> = vec![Vec::new(); max_height + 1];
        for (h, w) in layer.iter().enumerate() {
            if w.is_empty() {
                continue;
            }
            if h < max_height {
                add_into(&mut next[h + 1], w);
            }
            if h > 0 {
                add_into(&mut next[h - 1], &times_q_integer(w, h));
            }
        }
        layer = next;
    }
    let counts = layer.swap_remove(0);
    QPoly::from_coeffs(
        counts
            .into_iter()
            .map(|c| Rational::from_integer(c.into()))
            .collect(),
    )
}

fn add_into(acc: &mut Vec<BigUint>, w: &[BigUint]) {
    if acc.len() < w.len() {
        acc.resize(w.len(), BigUint::zero());
    }
    for (a, b) in acc.iter_mut().zip(w) {
        *a += b;
    }
}

/// `w(q) * (1 + q + ... + q^{h-1})` as a sliding window sum.
fn times_q_integer(w: &[BigUint], h: usize) -> Vec<BigUint> {
    let mut out = Vec::with_capacity(w.len() + h - 1);
    let mut window = BigUint::zero();
    for i in 0..w.len() + h - 1 {
        if i < w.len() {
            window += &w[i];
        }
        if i >= h {
            window -= &w[i - h];
        }
        out.push(window.clone());
    }
    out
}

/// `sum of q^inv(sigma)` over `sigma` in `S_{2n}` with
/// `|sigma({1..n}) ∩ {1..n}| = p`, in closed form
/// `([n]_q!)^2 [n choose p]_q^2 q^((n-p)^2)`.
pub fn inversion_sum_spn(n: usize, p: usize) -> QPoly {
    if p > n {
        return QPoly::zero();
    }
    let fact = q_factorial(n);
    let binom = q_binomial(n, p);
    let shift = QPoly::monomial(num_traits::One::one(), (n - p) * (n - p));
    &(&(&fact * &fact) * &(&binom * &binom)) * &shift
}

/// [`inversion_sum_spn`] by enumerating `S_{2n}`.
pub fn inversion_sum_spn_enumerated(n: usize, p: usize) -> Result<QPoly> {
    if 2 * n > DEFAULT_PERMUTATION_CAP {
        return Err(Error::ResourceCap {
            what: "permutation size",
            requested: 2 * n,
            cap: DEFAULT_PERMUTATION_CAP,
        });
    }
    let mut hist = vec![0u64; n * (2 * n).saturating_sub(1) + 1];
    for s in permutations(2 * n) {
        let hits = s.images()[..n].iter().filter(|&&v| v <= n).count();
        if hits == p {
            hist[s.inversions()] += 1;
        }
    }
    Ok(QPoly::from_counts(&hist))
}

/// `sum over S_n of q^inv` by enumeration, for cross-checking `[n]_q!`.
pub fn inversion_sum_enumerated(n: usize) -> Result<QPoly> {
    if n > DEFAULT_PERMUTATION_CAP {
        return Err(Error::ResourceCap {
            what: "permutation size",
            requested: n,
            cap: DEFAULT_PERMUTATION_CAP,
        });
    }
    let mut hist = vec![0u64; n * n.saturating_sub(1) / 2 + 1];
    for s in permutations(n) {
        hist[s.inversions()] += 1;
    }
    Ok(QPoly::from_counts(&hist))
}

/// Builds `F(sigma1, sigma2, pi')`: blocks 1 and 2 (sizes `n1`, `n2`) are
/// joined by the pairs `(sigma1(i), n1 + sigma2(i))`, and `pi'` governs the
/// leftover points of blocks 1 and 2 (as one merged block, in increasing order)
/// together with the blocks after them.
///
/// `pi_prime` pairs `{1 .. (n1 + n2 - 2p) + rest}`; when `n1 + n2 = 2p` the
/// merged block is absent.
pub fn contraction_gluing(
    n1: usize,
    n2: usize,
    sigma1: &DecreasingInjection,
    sigma2: &Injection,
    pi_prime: &Pairing,
) -> Result<Pairing> {
    let p = sigma1.images().len();
    if sigma2.images().len() != p || sigma1.ambient() != n1 || sigma2.ambient() != n2 {
        return contract("sigma1 and sigma2 must both map 1..=p into blocks n1 and n2");
    }
    let linked_first: Vec<usize> = sigma1.images().to_vec();
    let linked_second: Vec<usize> = sigma2.images().iter().map(|&v| n1 + v).collect();
    let leftover: Vec<usize> = (1..=n1 + n2)
        .filter(|x| !linked_first.contains(x) && !linked_second.contains(x))
        .collect();
    let map = |x: usize| {
        if x <= leftover.len() {
            leftover[x - 1]
        } else {
            x - leftover.len() + n1 + n2
        }
    };
    let mut pairs: Vec<(usize, usize)> = linked_first
        .iter()
        .zip(&linked_second)
        .map(|(&a, &b)| (a, b))
        .collect();
    pairs.extend(pi_prime.pairs().iter().map(|&(a, b)| (map(a), map(b))));
    Pairing::from_pairs(&pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_crossings(pairs: &[(usize, usize)]) -> usize {
        let mut c = 0;
        for (i, &(x1, y1)) in pairs.iter().enumerate() {
            for &(x2, y2) in &pairs[i + 1..] {
                let (a, b) = if x1 < x2 {
                    ((x1, y1), (x2, y2))
                } else {
                    ((x2, y2), (x1, y1))
                };
                if a.0 < b.0 && b.0 < a.1 && a.1 < b.1 {
                    c += 1;
                }
            }
        }
        c
    }

    #[test]
    fn small_pairing_sets() {
        let two: Vec<_> = enumerate_pairings(2).unwrap().collect();
        assert_eq!(two.len(), 1);
        assert_eq!(two[0].to_text(), "[[1,2]]");
        assert_eq!(two[0].crossings(), 0);

        let four: Vec<_> = enumerate_pairings(4).unwrap().collect();
        let mut cr: Vec<usize> = four.iter().map(Pairing::crossings).collect();
        cr.sort_unstable();
        assert_eq!(cr, vec![0, 0, 1]);
        assert_eq!(enumerate_pairings(6).unwrap().count(), 15);
        assert_eq!(enumerate_pairings(5).unwrap().count(), 0);
    }

    #[test]
    fn canonical_order() {
        let texts: Vec<String> = enumerate_pairings(4)
            .unwrap()
            .map(|p| p.to_text())
            .collect();
        assert_eq!(texts, ["[[1,2],[3,4]]", "[[1,3],[2,4]]", "[[1,4],[2,3]]"]);
    }

    #[test]
    fn cap_is_loud() {
        assert!(matches!(
            enumerate_pairings(22),
            Err(Error::ResourceCap { requested: 22, .. })
        ));
    }

    #[test]
    fn crossing_examples() {
        let p = Pairing::from_pairs(&[(1, 2), (3, 4)]).unwrap();
        assert_eq!(crossing_number(&p), 0);
        let p = Pairing::from_pairs(&[(1, 3), (2, 4)]).unwrap();
        assert_eq!(crossing_number(&p), 1);
        let pairs = [(1, 4), (2, 8), (3, 6), (5, 9), (7, 11), (10, 12)];
        let p = Pairing::from_pairs(&pairs).unwrap();
        assert_eq!(crossing_number(&p), brute_crossings(&pairs));
        assert_eq!(crossing_number(&p), 7);
        assert_eq!(p.to_text(), "[[1,4],[2,8],[3,6],[5,9],[7,11],[10,12]]");
        assert_eq!(Pairing::parse_text(&p.to_text()).unwrap(), p);
    }

    #[test]
    fn invalid_pairings_rejected() {
        assert!(Pairing::from_pairs(&[(1, 2), (2, 3)]).is_err());
        assert!(Pairing::from_pairs(&[(1, 5)]).is_err());
    }

    #[test]
    fn noncrossing_counts() {
        assert_eq!(enumerate_noncrossing(2).unwrap().count(), 1);
        assert_eq!(enumerate_noncrossing(4).unwrap().count(), 2);
        assert_eq!(enumerate_noncrossing(6).unwrap().count(), 5);
    }

    #[test]
    fn respecting_examples() {
        let b = BlockStructure::new(vec![1, 1]).unwrap();
        let all: Vec<_> = enumerate_respecting(&b).unwrap().collect();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].to_text(), "[[1,2]]");

        let b = BlockStructure::new(vec![2, 1, 1]).unwrap();
        let oracle = enumerate_pairings(4)
            .unwrap()
            .filter(|p| {
                p.pairs()
                    .iter()
                    .all(|&(x, y)| b.block_of(x) != b.block_of(y))
            })
            .count();
        assert_eq!(oracle, 2);
        assert_eq!(enumerate_respecting(&b).unwrap().count(), oracle);

        let b = BlockStructure::new(vec![3, 1]).unwrap();
        assert_eq!(enumerate_respecting(&b).unwrap().count(), 0);
        assert!(BlockStructure::new(vec![2, 0]).is_err());
    }

    #[test]
    fn p2_examples() {
        assert_eq!(
            p2_of_permutation(&Permutation::identity(1)).to_text(),
            "[[1,2]]"
        );
        let id = p2_of_permutation(&Permutation::identity(2));
        assert_eq!(id.to_text(), "[[1,4],[2,3]]");
        assert_eq!(id.crossings(), 0);
        let swap = p2_of_permutation(&Permutation::new(vec![2, 1]).unwrap());
        assert_eq!(swap.to_text(), "[[1,3],[2,4]]");
        assert_eq!(swap.crossings(), 1);
    }

    #[test]
    fn colored_examples() {
        assert_eq!(enumerate_colored(&[2, 2]).unwrap().count(), 1);
        assert_eq!(enumerate_colored(&[2, 3]).unwrap().count(), 0);
        let all: Vec<_> = enumerate_colored(&[2, 2, 2, 2]).unwrap().collect();
        assert_eq!(all.len(), 3);
        assert!(all
            .iter()
            .all(|c| c.classes.len() == 1 && c.classes[0].color == 2));
        let mixed: Vec<_> = enumerate_colored(&[1, 2, 1, 2]).unwrap().collect();
        assert_eq!(mixed.len(), 1);
        assert_eq!(mixed[0].classes[0].pairs, vec![(1, 3)]);
        assert_eq!(mixed[0].classes[1].pairs, vec![(2, 4)]);
    }

    #[test]
    fn cross_color_examples() {
        let p = Pairing::from_pairs(&[(1, 3), (2, 4)]).unwrap();
        assert_eq!(cross_color_crossings(&p, &[(1, 3)], &[(2, 4)]).unwrap(), 1);
        assert_eq!(cross_color_crossings(&p, p.pairs(), p.pairs()).unwrap(), 1);
        let nested = Pairing::from_pairs(&[(1, 4), (2, 3)]).unwrap();
        assert_eq!(
            cross_color_crossings(&nested, &[(1, 4)], &[(2, 3)]).unwrap(),
            0
        );
        assert!(cross_color_crossings(&nested, &[(1, 2)], &[(2, 3)]).is_err());

        // the projected pairing of the 14-block example
        let first = [(2, 8), (5, 13)];
        let second = [(1, 12), (4, 10), (6, 14)];
        let third = [(3, 7), (9, 11)];
        let all: Vec<_> = first.iter().chain(&second).chain(&third).copied().collect();
        let p = Pairing::from_pairs(&all).unwrap();
        let mut brute = 0;
        for a in &first {
            for b in &second {
                if brute_crossings(&[*a, *b]) == 1 {
                    brute += 1;
                }
            }
        }
        assert_eq!(brute, 5);
        assert_eq!(cross_color_crossings(&p, &first, &second).unwrap(), brute);
    }

    #[test]
    fn gaussian_moment_examples() {
        assert_eq!(gaussian_moment(2).unwrap(), QPoly::one());
        assert_eq!(gaussian_moment(4).unwrap(), QPoly::from_integers(&[2, 1]));
        assert_eq!(
            gaussian_moment(6).unwrap(),
            QPoly::from_integers(&[5, 6, 3, 1])
        );
        assert!(gaussian_moment(5).unwrap().is_zero());
        assert_eq!(gaussian_moment_fast(4), QPoly::from_integers(&[2, 1]));
        let m8 = gaussian_moment_fast(8);
        assert_eq!(m8.eval(&crate::qalgebra::int(1)), crate::qalgebra::int(105));
        assert_eq!(m8.eval(&crate::qalgebra::int(0)), crate::qalgebra::int(14));
    }

    #[test]
    fn inversion_sum_examples() {
        assert_eq!(inversion_sum_spn(1, 1), QPoly::one());
        assert_eq!(inversion_sum_spn(1, 0), QPoly::q());
        let total: QPoly = (0..=2).map(|p| inversion_sum_spn(2, p)).sum();
        assert_eq!(total, q_factorial(4));
        for n in 1..=3 {
            for p in 0..=n {
                assert_eq!(
                    inversion_sum_spn(n, p),
                    inversion_sum_spn_enumerated(n, p).unwrap(),
                    "n={n} p={p}"
                );
            }
        }
    }

    #[test]
    fn alpha_beta() {
        let d = DecreasingInjection::new(vec![2, 1], 2).unwrap();
        assert_eq!(d.alpha(), 0);
        let d = DecreasingInjection::new(vec![1], 2).unwrap();
        assert_eq!(d.alpha(), 1);
        assert!(DecreasingInjection::new(vec![1, 2], 2).is_err());
        let s = Injection::new(vec![2, 1], 2).unwrap();
        assert_eq!(s.beta(), 1);
        assert_eq!(Injection::new(vec![2], 2).unwrap().beta(), 1);
        assert!(Injection::new(vec![1, 1], 2).is_err());
        assert_eq!(decreasing_injections(2, 4).len(), 6);
        assert_eq!(injections(2, 4).len(), 12);
    }

    #[test]
    fn block_structure_indexing() {
        let b = BlockStructure::new(vec![3, 4, 3, 2]).unwrap();
        assert_eq!(b.total(), 12);
        assert_eq!(b.block(1), 4..8);
        assert_eq!(b.block_of(1), 0);
        assert_eq!(b.block_of(7), 1);
        assert_eq!(b.block_of(12), 3);
        let p = Pairing::from_pairs(&[(1, 4), (2, 8), (3, 6), (5, 9), (7, 11), (10, 12)]).unwrap();
        assert!(b.respects(&p));
        assert_eq!(b.links(&p, 0, 1), 2);
    }

    #[test]
    fn gluing_example() {
        // n1 = n2 = 2, p = 2, swap: pairs (2,4), (1,3)
        let s1 = DecreasingInjection::new(vec![2, 1], 2).unwrap();
        let s2 = Injection::new(vec![2, 1], 2).unwrap();
        let empty = Pairing::from_pairs(&[]).unwrap();
        let f = contraction_gluing(2, 2, &s1, &s2, &empty).unwrap();
        assert_eq!(f.to_text(), "[[1,3],[2,4]]");
        assert_eq!(f.crossings(), s1.alpha() + s2.beta());
    }
}
