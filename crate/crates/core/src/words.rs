//! Closed-word combinatorics for the moment method: supports,
//! multiplicities, canonical forms, class enumeration and sizes, signed
//! weights, and the closed-form finite-n moment prediction of the
//! dominant support class.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::cells::{sign_entry, Cell};
use crate::combin::{binom, binom_f64, catalan, factorial, falling};
use crate::error::{Error, Result};
use crate::sampler::ModelParams;

/// A word: a sequence of (d-1)-cells whose consecutive unions are d-cells.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word {
    letters: Vec<Cell>,
    d: usize,
}

/// True iff every letter is a (d-1)-cell and every consecutive union has
/// d+1 vertices; errors only on malformed input.
pub fn validate_word(letters: &[Cell], d: usize) -> Result<bool> {
    if letters.is_empty() {
        return Err(Error::InvalidArgument(
            "words need at least one letter".into(),
        ));
    }
    if d < 2 {
        return Err(Error::InvalidDimension(format!(
            "words are defined for d >= 2, got {d}"
        )));
    }
    if letters.iter().any(|c| c.dim() != d - 1) {
        return Err(Error::InvalidArgument(format!(
            "every letter must be a {}-cell",
            d - 1
        )));
    }
    Ok(letters.windows(2).all(|w| w[0].union(&w[1]).dim() == d))
}

impl Word {
    pub fn new(letters: Vec<Cell>, d: usize) -> Result<Self> {
        if !validate_word(&letters, d)? {
            return Err(Error::InvalidArgument(
                "consecutive letters must union to d-cells".into(),
            ));
        }
        Ok(Self { letters, d })
    }

    pub fn letters(&self) -> &[Cell] {
        &self.letters
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of steps (length minus one).
    pub fn steps(&self) -> usize {
        self.letters.len() - 1
    }

    pub fn is_closed(&self) -> bool {
        self.letters.first() == self.letters.last() && self.letters.len() > 1
    }

    /// Vertices appearing in the word's letters, ascending.
    pub fn vertex_support(&self) -> Vec<u32> {
        let mut vs: BTreeSet<u32> = BTreeSet::new();
        for l in &self.letters {
            vs.extend(l.vertices().iter().copied());
        }
        vs.into_iter().collect()
    }

    /// Serialization used by word dumps: letters as comma-separated vertex
    /// lists joined by '|'.
    pub fn to_line(&self) -> String {
        self.letters
            .iter()
            .map(|c| {
                c.vertices()
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect::<Vec<_>>()
            .join("|")
    }

    pub fn from_line(line: &str, d: usize) -> Result<Self> {
        let letters: Result<Vec<Cell>> = line
            .split('|')
            .map(|part| {
                let vs: std::result::Result<Vec<u32>, _> =
                    part.split(',').map(|t| t.trim().parse::<u32>()).collect();
                let vs =
                    vs.map_err(|e| Error::InvalidArgument(format!("bad letter {part:?}: {e}")))?;
                Cell::new(vs)
            })
            .collect();
        Word::new(letters?, d)
    }
}

/// All u-cells contained in some consecutive union of the word.
pub fn supp(w: &Word, u: usize) -> Result<BTreeSet<Cell>> {
    if u > w.d {
        return Err(Error::InvalidDimension(format!(
            "supports exist for dimensions 0..={}, got {u}",
            w.d
        )));
    }
    let mut out = BTreeSet::new();
    for pair in w.letters.windows(2) {
        let union = pair[0].union(&pair[1]);
        for c in union.subcells(u) {
            out.insert(c);
        }
    }
    Ok(out)
}

/// Traversal counts: N_w(e) per unordered letter-pair edge and N_w(tau)
/// per d-cell.
#[derive(Debug, Clone, Default)]
pub struct Multiplicities {
    pub edges: BTreeMap<(Cell, Cell), usize>,
    pub cells: BTreeMap<Cell, usize>,
}

pub fn multiplicities(w: &Word) -> Multiplicities {
    let mut m = Multiplicities::default();
    for pair in w.letters.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let key = if a <= b {
            (a.clone(), b.clone())
        } else {
            (b.clone(), a.clone())
        };
        *m.edges.entry(key).or_insert(0) += 1;
        *m.cells.entry(a.union(b)).or_insert(0) += 1;
    }
    m
}

/// Relabels so the first letter is {1, ..., d} (increasing on the first
/// letter) and later new vertices take successive integers in order of
/// first appearance.
pub fn canonical_form(w: &Word) -> Result<Word> {
    let d = w.d;
    let mut relabel: HashMap<u32, u32> = HashMap::new();
    for (t, &v) in w.letters[0].vertices().iter().enumerate() {
        relabel.insert(v, t as u32 + 1);
    }
    let mut next = d as u32 + 1;
    for letter in &w.letters {
        for &v in letter.vertices() {
            relabel.entry(v).or_insert_with(|| {
                let assigned = next;
                next += 1;
                assigned
            });
        }
    }
    let letters: Result<Vec<Cell>> = w
        .letters
        .iter()
        .map(|c| Cell::from_unsorted(c.vertices().iter().map(|v| relabel[v]).collect()))
        .collect();
    Word::new(letters?, d)
}

/// An equivalence class of closed words, held by its canonical
/// representative with support/multiplicity metadata.
#[derive(Debug, Clone)]
pub struct WordClass {
    pub canon: Word,
    /// Number of steps (length minus one).
    pub k: usize,
    /// |supp_0|.
    pub s: usize,
    pub mult: Multiplicities,
}

impl WordClass {
    pub fn new(w: &Word) -> Result<Self> {
        if !w.is_closed() {
            return Err(Error::InvalidArgument(
                "word classes are closed words".into(),
            ));
        }
        let canon = canonical_form(w)?;
        let s = canon.vertex_support().len();
        let mult = multiplicities(&canon);
        Ok(Self {
            k: canon.steps(),
            s,
            mult,
            canon,
        })
    }

    /// True when the class has the maximal support size s = k/2 + d.
    pub fn is_maximal_support(&self) -> bool {
        self.k.is_multiple_of(2) && self.s == self.k / 2 + self.canon.d
    }
}

/// Number of words on {1..n} equivalent to the class representative:
/// n (n-1) ... (n-s+1) / d!, and 0 for n < s.
pub fn class_size(wc: &WordClass, n: u32) -> u128 {
    if (n as usize) < wc.s {
        return 0;
    }
    falling(n as u64, wc.s as u64) / factorial(wc.canon.d as u64)
}

/// Checks |supp_u| = C(d, u+1) + (k/2) C(d, u) for a maximal-support class.
pub fn supp_cardinality_check(wc: &WordClass, u: usize) -> Result<bool> {
    if !wc.is_maximal_support() {
        return Err(Error::InvalidArgument(
            "support cardinality formula applies to maximal-support classes".into(),
        ));
    }
    let d = wc.canon.d as u64;
    let expect = binom(d, u as u64 + 1) + (wc.k as u64 / 2) * binom(d, u as u64);
    Ok(supp(&wc.canon, u)?.len() as u64 == expect)
}

/// Which multiplicity the signed-weight exponent sums over negative-sign
/// edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignConvention {
    /// Sum of N_w(e) over negative edges: the product of per-step signs.
    EdgeMultiplicity,
    /// Sum of N_w(tau) over negative edges of each tau.
    CellMultiplicity,
}

/// The sign prefactor of a class in the signed moment expansion.
pub fn signed_weight(wc: &WordClass) -> i8 {
    signed_weight_with(wc, SignConvention::EdgeMultiplicity)
}

pub fn signed_weight_with(wc: &WordClass, conv: SignConvention) -> i8 {
    let d = wc.canon.d;
    let mut exponent = 0usize;
    for ((a, b), &n_e) in &wc.mult.edges {
        let s = sign_entry(a, b, d).expect("letters are (d-1)-cells");
        if s == -1 {
            exponent += match conv {
                SignConvention::EdgeMultiplicity => n_e,
                SignConvention::CellMultiplicity => wc.mult.cells[&a.union(b)],
            };
        }
    }
    if exponent.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Enumerates all classes of closed words with k steps, support size s,
/// and no d-cell traversed exactly once, as canonical representatives.
pub fn enumerate_classes(k: usize, s: usize, d: usize) -> Result<Vec<WordClass>> {
    if k > 10 || d > 4 {
        return Err(Error::ResourceGuard(format!(
            "word enumeration is limited to k <= 10 and d <= 4, got k = {k}, d = {d}"
        )));
    }
    if k < 2 {
        return Err(Error::InvalidArgument("closed classes need k >= 2".into()));
    }
    if d < 2 {
        return Err(Error::InvalidDimension("words need d >= 2".into()));
    }
    let mut out = Vec::new();
    if s < d + 1 || s > k + d {
        return Ok(out);
    }
    let first: Vec<u32> = (1..=d as u32).collect();
    let mut letters: Vec<Cell> = vec![Cell::new(first.clone())?];
    let mut stack_used = d as u32;
    search(
        &mut letters,
        &mut stack_used,
        k,
        s as u32,
        d,
        &first,
        &mut out,
    )?;
    Ok(out)
}

fn search(
    letters: &mut Vec<Cell>,
    used: &mut u32,
    k: usize,
    s: u32,
    d: usize,
    first: &[u32],
    out: &mut Vec<WordClass>,
) -> Result<()> {
    let steps_done = letters.len() - 1;
    if steps_done == k {
        if *used == s && letters.first() == letters.last() {
            let word = Word::new(letters.clone(), d)?;
            let wc = WordClass::new(&word)?;
            if wc.mult.cells.values().all(|&m| m != 1) {
                debug_assert_eq!(
                    wc.canon.letters, word.letters,
                    "search emits canonical words"
                );
                out.push(wc);
            }
        }
        return Ok(());
    }
    let steps_left = k - steps_done;
    let cur = letters.last().unwrap().clone();
    for drop_idx in 0..cur.vertices().len() {
        let x = cur.vertices()[drop_idx];
        let allow_new = *used < s;
        let y_max = if allow_new { *used + 1 } else { *used };
        for y in 1..=y_max {
            if cur.contains(y) {
                continue;
            }
            let mut verts: Vec<u32> = cur.vertices().iter().copied().filter(|&v| v != x).collect();
            verts.push(y);
            verts.sort_unstable();
            let next = Cell::new(verts)?;
            let introduces_new = y == *used + 1;
            let used_after = *used + u32::from(introduces_new);
            // must still be able to reach s distinct vertices
            if used_after + (steps_left as u32 - 1) < s {
                continue;
            }
            // must still be able to walk back to the first letter
            let missing = first.iter().filter(|&&v| !next.contains(v)).count();
            if missing > steps_left - 1 {
                continue;
            }
            letters.push(next);
            *used = used_after;
            search(letters, used, k, s, d, first, out)?;
            *used -= u32::from(introduces_new);
            letters.pop();
        }
    }
    Ok(())
}

/// |W_{k/2+d}^k| in closed form: Catalan(k/2) d^{k/2}.
pub fn maximal_class_count(k: usize, d: usize) -> Result<u64> {
    if !k.is_multiple_of(2) {
        return Err(Error::InvalidArgument("maximal classes need even k".into()));
    }
    Ok(catalan(k as u64 / 2) * (d as u64).pow(k as u32 / 2))
}

/// E[(chi - p)^m] for chi ~ Bernoulli(p).
fn centered_bernoulli_power(m: usize, p: f64) -> f64 {
    if m == 0 {
        return 1.0;
    }
    (1.0 - p).powi(m as i32) * p + (-p).powi(m as i32) * (1.0 - p)
}

/// Exact expected k-th moment of the normalized centered matrix at
/// finite n, summing T(w) times the class size times P(E_w) over every
/// class of every support size. Slower than [`predicted_moment`] but free
/// of the O(1/(n p_d (1-p_d))) truncation of the dominant-class formula.
pub fn exact_expected_moment(k: usize, params: &ModelParams) -> Result<f64> {
    if k == 0 || k > 8 {
        return Err(Error::InvalidArgument(format!(
            "exact moments supported for k in 1..=8, got {k}"
        )));
    }
    let d = params.d;
    let p_d = params.p[d - 1];
    let mut numerator = 0.0;
    for s in (d + 1)..=(k / 2 + d) {
        for wc in enumerate_classes(k, s, d)? {
            let t_w: f64 = wc
                .mult
                .cells
                .values()
                .map(|&m| centered_bernoulli_power(m, p_d))
                .product();
            let mut p_event = 1.0;
            for u in 1..d {
                p_event *= params.p[u - 1].powi(supp(&wc.canon, u)?.len() as i32);
            }
            numerator += t_w * class_size(&wc, params.n) as f64 * p_event;
        }
    }
    let mut beta_prod = 1.0;
    for r in 1..=d {
        beta_prod *= params.p[r - 1].powf(binom_f64(d as u64, r as u64));
    }
    let denom = binom_f64(params.n as u64, d as u64)
        * (params.n as f64 * d as f64 * beta_prod * (1.0 - p_d)).powf(k as f64 / 2.0);
    if denom == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(numerator / denom)
}

/// Closed-form dominant-class prediction for the k-th moment of the
/// normalized centered matrix at finite n:
///
/// Catalan(k/2) d^(k/2) (p_d (1 - p_d))^(k/2) N_class prod_{i<d}
/// p_i^(beta_{i+1} + (k/2) beta_i), divided by C(n, d) (n d prod_r
/// p_r^beta_r (1 - p_d))^(k/2), with N_class = n!/((n - k/2 - d)! d!).
pub fn predicted_moment(k: usize, params: &ModelParams) -> Result<f64> {
    if !k.is_multiple_of(2) {
        return Err(Error::InvalidArgument(
            "odd moments vanish; the prediction is defined for even k".into(),
        ));
    }
    if k == 0 || k > 8 {
        return Err(Error::InvalidArgument(format!(
            "prediction supported for even k in 2..=8, got {k}"
        )));
    }
    let half = (k / 2) as u64;
    let d = params.d as u64;
    let n = params.n as u64;
    if n < half + d {
        return Err(Error::InvalidArgument(format!(
            "need n >= k/2 + d, got n = {n}"
        )));
    }
    let p_d = params.p[params.d - 1];
    let class_count = catalan(half) as f64 * (d as f64).powi(half as i32);
    let t_w = (p_d * (1.0 - p_d)).powi(half as i32);
    let class_sz = (falling(n, half + d) / factorial(d)) as f64;
    let mut p_event = 1.0;
    for i in 1..params.d {
        let beta_next = binom_f64(d, i as u64 + 1);
        let beta_i = binom_f64(d, i as u64);
        p_event *= params.p[i - 1].powf(beta_next + half as f64 * beta_i);
    }
    let mut beta_prod = 1.0;
    for r in 1..=params.d {
        beta_prod *= params.p[r - 1].powf(binom_f64(d, r as u64));
    }
    let denom = binom_f64(n, d)
        * (params.n as f64 * params.d as f64 * beta_prod * (1.0 - p_d)).powi(half as i32);
    if denom == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(class_count * t_w * class_sz * p_event / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cells::enumerate_cells;

    fn cell(v: &[u32]) -> Cell {
        Cell::new(v.to_vec()).unwrap()
    }

    fn word(letters: &[&[u32]], d: usize) -> Word {
        Word::new(letters.iter().map(|l| cell(l)).collect(), d).unwrap()
    }

    /// the worked example word used throughout: {1,2}{1,3}{3,4}{1,4}{2,4}{1,2}
    fn example_word() -> Word {
        word(&[&[1, 2], &[1, 3], &[3, 4], &[1, 4], &[2, 4], &[1, 2]], 2)
    }

    #[test]
    fn validation() {
        assert!(validate_word(&[cell(&[1, 2]), cell(&[1, 3])], 2).unwrap());
        assert!(!validate_word(&[cell(&[1, 2]), cell(&[3, 4])], 2).unwrap());
        assert!(validate_word(&[cell(&[1, 2])], 2).unwrap());
        assert!(validate_word(&[], 2).is_err());
        assert!(validate_word(&[cell(&[1, 2, 3])], 2).is_err());
        assert!(example_word().is_closed());
    }

    #[test]
    fn support_examples() {
        let w = example_word();
        let s0: Vec<u32> = supp(&w, 0)
            .unwrap()
            .iter()
            .map(|c| c.vertices()[0])
            .collect();
        assert_eq!(s0, vec![1, 2, 3, 4]);
        let s2 = supp(&w, 2).unwrap();
        let expect: BTreeSet<Cell> = [cell(&[1, 2, 3]), cell(&[1, 3, 4]), cell(&[1, 2, 4])]
            .into_iter()
            .collect();
        assert_eq!(s2, expect);
        // all six edges on the support appear at dimension 1
        assert_eq!(supp(&w, 1).unwrap().len(), 6);

        let single = word(&[&[1, 2]], 2);
        for u in 0..=2 {
            assert!(supp(&single, u).unwrap().is_empty());
        }
        assert!(supp(&single, 3).is_err());
    }

    #[test]
    fn multiplicity_examples() {
        let w = example_word();
        let m = multiplicities(&w);
        assert_eq!(m.cells[&cell(&[1, 2, 3])], 1);
        assert_eq!(m.cells[&cell(&[1, 3, 4])], 2);
        assert_eq!(m.cells[&cell(&[1, 2, 4])], 2);
        assert!(m.edges.values().all(|&c| c == 1));
        assert_eq!(m.cells.values().sum::<usize>(), w.steps());

        // length-2 closed word crosses its single edge twice
        let pong = word(&[&[1, 2], &[1, 3], &[1, 2]], 2);
        let m = multiplicities(&pong);
        assert_eq!(m.edges.len(), 1);
        assert_eq!(*m.edges.values().next().unwrap(), 2);
        assert_eq!(m.cells[&cell(&[1, 2, 3])], 2);
    }

    #[test]
    fn canonicalization_examples() {
        let w = word(&[&[3, 4], &[3, 6], &[5, 6], &[3, 6], &[3, 4]], 2);
        let canon = canonical_form(&w).unwrap();
        assert_eq!(
            canon,
            word(&[&[1, 2], &[1, 3], &[3, 4], &[1, 3], &[1, 2]], 2)
        );
        // idempotence
        assert_eq!(canonical_form(&canon).unwrap(), canon);

        // two equivalent words canonicalize identically
        let w1 = word(&[&[1, 2], &[1, 3], &[3, 4], &[2, 4], &[1, 2]], 2);
        let w2 = word(&[&[3, 5], &[1, 3], &[1, 7], &[5, 7], &[3, 5]], 2);
        assert_eq!(canonical_form(&w1).unwrap(), canonical_form(&w2).unwrap());
        assert_eq!(canonical_form(&w1).unwrap(), w1);
    }

    #[test]
    fn line_round_trip() {
        let w = example_word();
        let line = w.to_line();
        assert_eq!(line, "1,2|1,3|3,4|1,4|2,4|1,2");
        assert_eq!(Word::from_line(&line, 2).unwrap(), w);
        assert!(Word::from_line("1,2|9", 2).is_err());
    }

    #[test]
    fn enumeration_counts_match_formula() {
        for (k, d, expect) in [
            (2usize, 2usize, 2u64),
            (4, 2, 8),
            (6, 2, 40),
            (2, 3, 3),
            (4, 3, 18),
        ] {
            let s = k / 2 + d;
            let classes = enumerate_classes(k, s, d).unwrap();
            assert_eq!(classes.len() as u64, expect, "k={k} d={d}");
            assert_eq!(maximal_class_count(k, d).unwrap(), expect);
            for wc in &classes {
                assert!(wc.is_maximal_support());
                // dominant classes traverse every d-cell exactly twice
                assert!(wc.mult.cells.values().all(|&m| m == 2));
            }
        }
    }

    #[test]
    fn enumeration_respects_bounds() {
        // |W_s^k| <= (d s)^k on enumerated ranges, plus the support bound
        for d in 2..=3usize {
            for k in [2usize, 4, 6] {
                for s in (d + 1)..=(k / 2 + d) {
                    let classes = enumerate_classes(k, s, d).unwrap();
                    let bound = ((d * s) as u64).pow(k as u32);
                    assert!((classes.len() as u64) <= bound);
                    for wc in &classes {
                        let supp_d = supp(&wc.canon, d).unwrap().len();
                        assert!(wc.s <= supp_d + d, "support bound violated");
                        // enumerated words are canonical and deduplicated
                        assert_eq!(canonical_form(&wc.canon).unwrap(), wc.canon);
                    }
                }
            }
        }
        // above the maximal support size nothing exists
        assert!(enumerate_classes(4, 5, 2).unwrap().is_empty());
        assert!(enumerate_classes(2, 2, 2).unwrap().is_empty());
        assert!(enumerate_classes(12, 8, 2).is_err());
        assert!(enumerate_classes(4, 4, 5).is_err());
    }

    #[test]
    fn enumeration_has_no_duplicates() {
        let classes = enumerate_classes(6, 5, 2).unwrap();
        let set: BTreeSet<String> = classes.iter().map(|c| c.canon.to_line()).collect();
        assert_eq!(set.len(), classes.len());
    }

    #[test]
    fn class_size_brute_force() {
        // enumerate every closed 2-step word on [4] for d = 2 and group by
        // canonical form; each group must match class_size
        let letters = enumerate_cells(4, 1).unwrap();
        let mut groups: BTreeMap<String, (WordClass, u64)> = BTreeMap::new();
        for a in &letters {
            for b in &letters {
                if a.union(b).dim() != 2 {
                    continue;
                }
                let w = Word::new(vec![a.clone(), b.clone(), a.clone()], 2).unwrap();
                let wc = WordClass::new(&w).unwrap();
                let key = wc.canon.to_line();
                groups
                    .entry(key)
                    .and_modify(|e| e.1 += 1)
                    .or_insert((wc, 1));
            }
        }
        assert_eq!(groups.len(), 2);
        for (wc, count) in groups.values() {
            assert_eq!(class_size(wc, 4), *count as u128, "{}", wc.canon.to_line());
            assert_eq!(class_size(wc, 4), 12);
        }
        // n = s gives s!/d!, n < s gives zero
        let wc = groups.values().next().unwrap().0.clone();
        assert_eq!(class_size(&wc, 3), 3);
        assert_eq!(class_size(&wc, 2), 0);
    }

    #[test]
    fn support_cardinality_formula() {
        // d=2, k=4, u=1: C(2,2) + 2 C(2,1) = 5
        for wc in enumerate_classes(4, 4, 2).unwrap() {
            assert!(supp_cardinality_check(&wc, 1).unwrap());
            assert_eq!(supp(&wc.canon, 1).unwrap().len(), 5);
            assert!(supp_cardinality_check(&wc, 2).unwrap());
        }
        // d=3, k=2, u=2: C(3,3) + 1*C(3,2) = 4
        for wc in enumerate_classes(2, 4, 3).unwrap() {
            assert!(supp_cardinality_check(&wc, 2).unwrap());
            assert_eq!(supp(&wc.canon, 2).unwrap().len(), 4);
        }
        // rejects non-maximal classes
        let wc = enumerate_classes(4, 3, 2)
            .unwrap()
            .into_iter()
            .next()
            .unwrap();
        assert!(supp_cardinality_check(&wc, 1).is_err());
    }

    #[test]
    fn signed_weight_of_dominant_classes_is_positive() {
        for d in 2..=3usize {
            for k in [2usize, 4, 6] {
                for wc in enumerate_classes(k, k / 2 + d, d).unwrap() {
                    assert_eq!(signed_weight(&wc), 1, "{}", wc.canon.to_line());
                    // both exponent readings agree on dominant classes
                    assert_eq!(signed_weight_with(&wc, SignConvention::CellMultiplicity), 1);
                }
            }
        }
    }

    /// Brute-force check that T(w) * signed_weight equals the direct
    /// expectation of the signed centered product over all chi assignments.
    #[test]
    fn signed_weight_matches_brute_force_expectation() {
        let p = 0.3f64;
        let centered_power = |m: usize| -> f64 {
            // E[(chi - p)^m] for chi ~ Bernoulli(p)
            (1.0 - p).powi(m as i32) * p + (-p).powi(m as i32) * (1.0 - p)
        };
        for s in 3..=4usize {
            for wc in enumerate_classes(4, s, 2).unwrap() {
                let w = &wc.canon;
                let taus: Vec<Cell> = supp(w, 2).unwrap().into_iter().collect();
                // T(w) from multiplicities
                let t_w: f64 = taus
                    .iter()
                    .map(|t| centered_power(*wc.mult.cells.get(t).unwrap_or(&0)))
                    .product();
                // direct expectation over 2^{|supp_d|} assignments
                let mut direct = 0.0;
                for mask in 0u32..(1 << taus.len()) {
                    let mut prob = 1.0;
                    let mut value = 1.0;
                    for (i, t) in taus.iter().enumerate() {
                        let on = mask >> i & 1 == 1;
                        prob *= if on { p } else { 1.0 - p };
                        let x = if on { 1.0 } else { 0.0 };
                        value *= (x - p).powi(wc.mult.cells[t] as i32);
                    }
                    direct += prob * value;
                }
                let step_sign: f64 = w
                    .letters()
                    .windows(2)
                    .map(|pair| sign_entry(&pair[0], &pair[1], 2).unwrap() as f64)
                    .product();
                let expect = direct * step_sign;
                let got = t_w * signed_weight(&wc) as f64;
                assert!(
                    (expect - got).abs() < 1e-12,
                    "{}: {expect} vs {got}",
                    w.to_line()
                );
            }
        }
    }

    #[test]
    fn predicted_moment_closed_forms() {
        // k = 2, d = 2 simplifies to ((n-2)/n) p_1
        let p = ModelParams::new(40, 2, vec![0.8, 0.7], 0).unwrap();
        let m2 = predicted_moment(2, &p).unwrap();
        assert!((m2 - 0.76).abs() < 1e-12);
        let m4 = predicted_moment(4, &p).unwrap();
        let expect = 2.0 * 0.8 * 38.0 * 37.0 / 1600.0;
        assert!((m4 - expect).abs() < 1e-12);

        // large n tends to Catalan(k/2) * c
        let p = ModelParams::new(20_000, 2, vec![0.8, 0.3], 0).unwrap();
        assert!((predicted_moment(2, &p).unwrap() - 0.8).abs() < 1e-3);
        assert!((predicted_moment(4, &p).unwrap() - 1.6).abs() < 1e-3);

        // Linial-Meshulam degeneration: c = 1
        let p = ModelParams::new(50, 2, vec![1.0, 0.4], 0).unwrap();
        assert!((predicted_moment(2, &p).unwrap() - 48.0 / 50.0).abs() < 1e-12);

        assert!(predicted_moment(3, &p).is_err());
        assert!(predicted_moment(10, &p).is_err());
    }

    #[test]
    fn exact_moment_agrees_with_prediction_where_prediction_is_exact() {
        // for k = 2 the dominant class is the only class, so both agree
        for n in [10u32, 40, 100] {
            let p = ModelParams::new(n, 2, vec![0.8, 0.7], 0).unwrap();
            let exact = exact_expected_moment(2, &p).unwrap();
            let dominant = predicted_moment(2, &p).unwrap();
            assert!((exact - dominant).abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn dominant_truncation_gap_shrinks_like_one_over_n() {
        // for k = 4 the sub-dominant classes contribute O(1/n)
        let gap = |n: u32| {
            let p = ModelParams::new(n, 2, vec![0.8, 0.7], 0).unwrap();
            exact_expected_moment(4, &p).unwrap() - predicted_moment(4, &p).unwrap()
        };
        let (g40, g80, g160) = (gap(40), gap(80), gap(160));
        assert!(g40 > 0.0);
        assert!(g40 > 1.5 * g80 && g80 > 1.5 * g160);
        assert!(g40 / g80 < 2.5 && g80 / g160 < 2.5);
    }
}
