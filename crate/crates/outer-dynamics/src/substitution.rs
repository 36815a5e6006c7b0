//! Standalone substitution dynamics: transition matrices, block
//! substitutions on occurring words, primitivity, and limit letter/word
//! frequencies with a brute-force expansion oracle.

use crate::error::{Error, Result};
use crate::matrix::{self, IntMatrix, Primitivity};
use num::rational::BigRational;
use num::BigInt;
use serde_json::Value;
use std::collections::{BTreeMap, BTreeSet};

/// A letter of the alphabet; block substitutions use concatenated names.
pub type Letter = String;

/// A word is a sequence of letters.
pub type Word = Vec<Letter>;

/// Hard cap on the length of literally expanded words.
pub const EXPANSION_CAP: usize = 10_000_000;

/// A substitution `letter -> nonempty word`, optionally with an ordered
/// partition of the alphabet into blocks `B_0..B_k` and a cutoff index `p`
/// used by the weighted length: only letters in `B_j` with `j < p` count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubstitutionSystem {
    pub alphabet: Vec<Letter>,
    pub rules: BTreeMap<Letter, Word>,
    pub blocks: Option<Vec<Vec<Letter>>>,
    pub p: Option<usize>,
}

fn count_word(hay: &[Letter], pat: &[Letter]) -> usize {
    if pat.is_empty() || pat.len() > hay.len() {
        return 0;
    }
    (0..=hay.len() - pat.len())
        .filter(|&i| &hay[i..i + pat.len()] == pat)
        .count()
}

impl SubstitutionSystem {
    /// Validates the alphabet, the rules, and (when present) that the
    /// partition covers the alphabet exactly and that the transition matrix
    /// is lower block triangular with respect to it: for `x` in `B_i` the
    /// word `rules[x]` avoids every `B_j` with `j < i`. An empty alphabet
    /// is allowed (the degenerate substitution on no letters).
    pub fn new(
        alphabet: Vec<Letter>,
        rules: BTreeMap<Letter, Word>,
        blocks: Option<Vec<Vec<Letter>>>,
        p: Option<usize>,
    ) -> Result<Self> {
        let set: BTreeSet<&Letter> = alphabet.iter().collect();
        if set.len() != alphabet.len() {
            return Err(Error::structural("alphabet has repeated letters"));
        }
        for a in &alphabet {
            let w = rules
                .get(a)
                .ok_or_else(|| Error::structural(format!("no rule for letter {a:?}")))?;
            if w.is_empty() {
                return Err(Error::structural(format!("rule for {a:?} is empty")));
            }
            if let Some(x) = w.iter().find(|x| !set.contains(x)) {
                return Err(Error::structural(format!(
                    "rule for {a:?} uses unknown letter {x:?}"
                )));
            }
        }
        if rules.len() != alphabet.len() {
            return Err(Error::structural("rules for letters outside the alphabet"));
        }
        if let Some(bs) = &blocks {
            let mut seen: BTreeSet<&Letter> = BTreeSet::new();
            for b in bs {
                for x in b {
                    if !set.contains(x) {
                        return Err(Error::structural(format!(
                            "partition uses unknown letter {x:?}"
                        )));
                    }
                    if !seen.insert(x) {
                        return Err(Error::structural(format!(
                            "letter {x:?} appears in two partition blocks"
                        )));
                    }
                }
            }
            if seen.len() != alphabet.len() {
                return Err(Error::structural("partition does not cover the alphabet"));
            }
            if let Some(p) = p {
                if p > bs.len() {
                    return Err(Error::structural(format!(
                        "cutoff {p} exceeds the number of blocks {}",
                        bs.len()
                    )));
                }
            }
            // Lower block triangularity.
            let index: BTreeMap<&Letter, usize> = bs
                .iter()
                .enumerate()
                .flat_map(|(i, b)| b.iter().map(move |x| (x, i)))
                .collect();
            for (x, &i) in &index {
                for y in &rules[*x] {
                    if index[y] < i {
                        return Err(Error::structural(format!(
                            "rule for {x:?} (block {i}) contains {y:?} from an earlier block"
                        )));
                    }
                }
            }
        } else if p.is_some() {
            return Err(Error::structural("cutoff given without a partition"));
        }
        Ok(SubstitutionSystem {
            alphabet,
            rules,
            blocks,
            p,
        })
    }

    /// Parses `{alphabet, rules, blocks?, p?}`; rule and block words may be
    /// given as strings when every letter is a single character, or as
    /// arrays of letters.
    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::structural("substitution input must be a JSON object"))?;
        let alphabet: Vec<Letter> = match obj.get("alphabet") {
            Some(Value::Array(xs)) => xs
                .iter()
                .map(|x| {
                    x.as_str()
                        .map(str::to_owned)
                        .ok_or_else(|| Error::structural("alphabet entries must be strings"))
                })
                .collect::<Result<_>>()?,
            Some(Value::String(s)) => s.chars().map(|c| c.to_string()).collect(),
            _ => return Err(Error::structural("missing alphabet")),
        };
        let single_chars = alphabet.iter().all(|a| a.chars().count() == 1);
        let parse_word = |v: &Value| -> Result<Word> {
            match v {
                Value::Array(xs) => xs
                    .iter()
                    .map(|x| {
                        x.as_str()
                            .map(str::to_owned)
                            .ok_or_else(|| Error::structural("word entries must be strings"))
                    })
                    .collect(),
                Value::String(s) if single_chars => {
                    Ok(s.chars().map(|c| c.to_string()).collect())
                }
                Value::String(_) => Err(Error::structural(
                    "string-form words need a single-character alphabet",
                )),
                _ => Err(Error::structural("words must be strings or arrays")),
            }
        };
        let rules_obj = obj
            .get("rules")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::structural("missing rules object"))?;
        let mut rules = BTreeMap::new();
        for (k, v) in rules_obj {
            rules.insert(k.clone(), parse_word(v)?);
        }
        let blocks = match obj.get("blocks") {
            None | Some(Value::Null) => None,
            Some(Value::Array(bs)) => Some(
                bs.iter()
                    .map(&parse_word)
                    .collect::<Result<Vec<Word>>>()?,
            ),
            _ => return Err(Error::structural("blocks must be an array")),
        };
        let p = match obj.get("p") {
            None | Some(Value::Null) => None,
            Some(v) => Some(
                v.as_u64()
                    .ok_or_else(|| Error::structural("p must be a nonnegative integer"))?
                    as usize,
            ),
        };
        SubstitutionSystem::new(alphabet, rules, blocks, p)
    }

    pub fn to_json(&self) -> Value {
        let word = |w: &Word| Value::Array(w.iter().map(|x| Value::from(x.clone())).collect());
        let mut obj = serde_json::Map::new();
        obj.insert(
            "alphabet".into(),
            Value::Array(self.alphabet.iter().map(|a| Value::from(a.clone())).collect()),
        );
        obj.insert(
            "rules".into(),
            Value::Object(self.rules.iter().map(|(k, w)| (k.clone(), word(w))).collect()),
        );
        if let Some(bs) = &self.blocks {
            obj.insert("blocks".into(), Value::Array(bs.iter().map(word).collect()));
        }
        if let Some(p) = self.p {
            obj.insert("p".into(), Value::from(p as u64));
        }
        Value::Object(obj)
    }

    /// Index of the partition block containing a letter; 0 without a
    /// partition (the whole alphabet acts as a single block).
    pub fn block_of(&self, letter: &str) -> usize {
        match &self.blocks {
            None => 0,
            Some(bs) => bs
                .iter()
                .position(|b| b.iter().any(|x| x == letter))
                .expect("validated partition covers the alphabet"),
        }
    }

    /// The effective cutoff: `p` when given, otherwise all blocks count.
    pub fn effective_p(&self) -> usize {
        match (&self.p, &self.blocks) {
            (Some(p), _) => *p,
            (None, Some(bs)) => bs.len(),
            (None, None) => 1,
        }
    }

    /// Number of letters of `w` lying in a block `B_j` with `j` below the
    /// cutoff.
    pub fn weighted_len(&self, w: &[Letter]) -> usize {
        let p = self.effective_p();
        w.iter().filter(|x| self.block_of(x) < p).count()
    }

    /// One application of the substitution to a word.
    pub fn apply(&self, w: &[Letter]) -> Word {
        w.iter().flat_map(|x| self.rules[x].iter().cloned()).collect()
    }

    /// Literal expansion of the `n`-th iterate on a single letter, capped.
    pub fn expand(&self, a: &str, n: usize) -> Result<Word> {
        if !self.alphabet.iter().any(|x| x == a) {
            return Err(Error::structural(format!("unknown letter {a:?}")));
        }
        let mut w: Word = vec![a.to_owned()];
        for _ in 0..n {
            let next: usize = w.iter().map(|x| self.rules[x].len()).sum();
            if next > EXPANSION_CAP {
                return Err(Error::cap(format!(
                    "expansion exceeds {EXPANSION_CAP} letters"
                )));
            }
            w = self.apply(&w);
        }
        Ok(w)
    }

    /// The substitution whose rules are the `n`-th iterate of this one's.
    pub fn power(&self, n: usize) -> Result<SubstitutionSystem> {
        let mut rules = BTreeMap::new();
        for a in &self.alphabet {
            rules.insert(a.clone(), self.expand(a, n)?);
        }
        SubstitutionSystem::new(self.alphabet.clone(), rules, self.blocks.clone(), self.p)
    }

    /// Letters occurring in some iterate of `a` (including `a` itself).
    pub fn reachable_letters(&self, a: &str) -> BTreeSet<Letter> {
        let mut seen: BTreeSet<Letter> = BTreeSet::new();
        let mut stack = vec![a.to_owned()];
        seen.insert(a.to_owned());
        while let Some(x) = stack.pop() {
            for y in &self.rules[&x] {
                if seen.insert(y.clone()) {
                    stack.push(y.clone());
                }
            }
        }
        seen
    }
}

/// The matrix whose `(a, b)` entry counts occurrences of `a` in the rule
/// for `b`, rows and columns in alphabet order.
pub fn transition_matrix_sub(sys: &SubstitutionSystem) -> IntMatrix {
    sys.alphabet
        .iter()
        .map(|a| {
            sys.alphabet
                .iter()
                .map(|b| sys.rules[b].iter().filter(|x| *x == a).count() as u64)
                .collect()
        })
        .collect()
}

/// Diagonal block of the transition matrix on a subset of letters (rows and
/// columns restricted to `letters`, in the given order).
pub fn transition_submatrix(sys: &SubstitutionSystem, letters: &[Letter]) -> IntMatrix {
    letters
        .iter()
        .map(|a| {
            letters
                .iter()
                .map(|b| sys.rules[b].iter().filter(|x| *x == a).count() as u64)
                .collect()
        })
        .collect()
}

/// Primitivity classification of a square nonnegative integer matrix.
pub fn primitivity_check(m: &IntMatrix) -> Primitivity {
    matrix::primitivity_check(m)
}

fn word_blocks(w: &[Letter], l: usize) -> Vec<Word> {
    if w.len() < l {
        return Vec::new();
    }
    (0..=w.len() - l).map(|i| w[i..i + l].to_vec()).collect()
}

/// The image of an `l`-word under the induced substitution: the `l`-blocks
/// of the rule image starting at the positions covered by the image of the
/// first letter.
fn block_image(sys: &SubstitutionSystem, u: &[Letter], l: usize) -> Vec<Word> {
    let img = sys.apply(u);
    let k = sys.rules[&u[0]].len();
    (0..k).map(|i| img[i..i + l].to_vec()).collect()
}

/// All `l`-words occurring in some iterate of some letter: seeded with the
/// blocks of small iterates, then closed under taking blocks of rule
/// images.
pub fn occurring_words(sys: &SubstitutionSystem, l: usize) -> Result<Vec<Word>> {
    if l == 0 {
        return Err(Error::domain("word length must be positive"));
    }
    let mut occ: BTreeSet<Word> = BTreeSet::new();
    let seed_rounds = sys.alphabet.len() + l + 8;
    for a in &sys.alphabet {
        let mut w: Word = vec![a.clone()];
        for _ in 0..seed_rounds {
            occ.extend(word_blocks(&w, l));
            if w.len() >= l {
                break;
            }
            let next = sys.apply(&w);
            if next == w {
                break;
            }
            w = next;
        }
        occ.extend(word_blocks(&w, l));
    }
    // Close: every l-block of the image of an occurring word occurs.
    loop {
        let mut fresh: Vec<Word> = Vec::new();
        for u in &occ {
            for b in word_blocks(&sys.apply(u), l) {
                if !occ.contains(&b) {
                    fresh.push(b);
                }
            }
        }
        if fresh.is_empty() {
            break;
        }
        occ.extend(fresh);
    }
    Ok(occ.into_iter().collect())
}

/// A substitution on occurring `l`-words together with the word behind each
/// of its (concatenated-name) letters.
#[derive(Debug, Clone)]
pub struct BlockSubstitution {
    pub system: SubstitutionSystem,
    /// `letter_words[i]` is the `l`-word named by `system.alphabet[i]`.
    pub letter_words: Vec<Word>,
    pub l: usize,
}

impl BlockSubstitution {
    /// The concatenated name of an `l`-word, if it occurs.
    pub fn name_of(&self, w: &[Letter]) -> Option<&Letter> {
        self.letter_words
            .iter()
            .position(|u| u == w)
            .map(|i| &self.system.alphabet[i])
    }

    /// Indices (into the block alphabet) of the words starting in parent
    /// block `i` that avoid every earlier parent block.
    pub fn tilde_letters(&self, parent: &SubstitutionSystem, i: usize) -> Vec<usize> {
        self.letter_words
            .iter()
            .enumerate()
            .filter(|(_, w)| {
                parent.block_of(&w[0]) == i && w.iter().all(|x| parent.block_of(x) >= i)
            })
            .map(|(j, _)| j)
            .collect()
    }

    /// Indices of the words starting in parent block `i` that contain a
    /// letter of some earlier parent block.
    pub fn bar_letters(&self, parent: &SubstitutionSystem, i: usize) -> Vec<usize> {
        self.letter_words
            .iter()
            .enumerate()
            .filter(|(_, w)| {
                parent.block_of(&w[0]) == i && w.iter().any(|x| parent.block_of(x) < i)
            })
            .map(|(j, _)| j)
            .collect()
    }
}

/// The induced substitution on occurring `l`-words. With a partition on the
/// base system, the block alphabet is partitioned by starting letter, words
/// reaching back into an earlier block split off before the rest of their
/// stratum, preserving lower block triangularity.
pub fn block_substitution(sys: &SubstitutionSystem, l: usize) -> Result<BlockSubstitution> {
    if l == 0 {
        return Err(Error::domain("block length must be positive"));
    }
    if l == 1 {
        let letter_words = sys.alphabet.iter().map(|a| vec![a.clone()]).collect();
        return Ok(BlockSubstitution {
            system: sys.clone(),
            letter_words,
            l,
        });
    }
    let words = occurring_words(sys, l)?;
    let names: Vec<Letter> = words.iter().map(|w| w.concat()).collect();
    let name_set: BTreeSet<&Letter> = names.iter().collect();
    if name_set.len() != names.len() {
        return Err(Error::structural(
            "concatenated block-letter names collide; rename base letters",
        ));
    }
    let name_of = |w: &Word| -> Letter { w.concat() };
    let mut rules = BTreeMap::new();
    for (w, name) in words.iter().zip(&names) {
        let img: Word = block_image(sys, w, l).iter().map(&name_of).collect();
        rules.insert(name.clone(), img);
    }
    let blocks = sys.blocks.as_ref().map(|bs| {
        let mut parts: Vec<Vec<Letter>> = Vec::new();
        for i in 0..bs.len() {
            let bar: Vec<Letter> = words
                .iter()
                .zip(&names)
                .filter(|(w, _)| {
                    sys.block_of(&w[0]) == i && w.iter().any(|x| sys.block_of(x) < i)
                })
                .map(|(_, n)| n.clone())
                .collect();
            let tilde: Vec<Letter> = words
                .iter()
                .zip(&names)
                .filter(|(w, _)| {
                    sys.block_of(&w[0]) == i && w.iter().all(|x| sys.block_of(x) >= i)
                })
                .map(|(_, n)| n.clone())
                .collect();
            if !bar.is_empty() {
                parts.push(bar);
            }
            parts.push(tilde);
        }
        parts
    });
    // The cutoff is positional and the induced partition reshuffles
    // positions, so it is not carried over; the weighted length is always
    // taken on the base system.
    let system = SubstitutionSystem::new(names, rules, blocks, None)?;
    Ok(BlockSubstitution {
        system,
        letter_words: words,
        l,
    })
}

/// A frequency estimate with its achieved tolerance.
#[derive(Debug, Clone, Copy)]
pub struct FrequencyEstimate {
    pub value: f64,
    pub tol: f64,
    pub iterations: usize,
    /// A reported zero cannot be distinguished from a value below the
    /// tolerance.
    pub possibly_below_tolerance: bool,
}

const FREQ_TOL: f64 = 1e-10;
const FREQ_CAP: usize = 10_000;

/// The limit of `(w, ζⁿ(a))` over the weighted length of `ζⁿ(a)`, computed
/// by renormalized iteration of the induced substitution matrix on
/// `|w|`-words. Requires the rule for `a` to start with `a` and a primitive
/// counted diagonal block with spectral radius above one reachable from
/// `a`.
pub fn limit_frequency(
    sys: &SubstitutionSystem,
    a: &str,
    w: &[Letter],
) -> Result<FrequencyEstimate> {
    if w.is_empty() {
        return Err(Error::domain("the counted word must be nonempty"));
    }
    if !sys.alphabet.iter().any(|x| x == a) {
        return Err(Error::structural(format!("unknown letter {a:?}")));
    }
    if sys.rules[a].first().map(String::as_str) != Some(a) {
        return Err(Error::domain(format!(
            "the rule for {a:?} does not start with {a:?}"
        )));
    }
    let p = sys.effective_p();
    if sys.block_of(a) >= p {
        return Err(Error::domain(format!(
            "letter {a:?} lies outside the counted blocks"
        )));
    }
    let reach = sys.reachable_letters(a);
    let one_block = vec![sys.alphabet.clone()];
    let bs = sys.blocks.as_ref().unwrap_or(&one_block);
    let driving = (0..p.min(bs.len())).any(|j| {
        bs[j].iter().any(|x| reach.contains(x)) && {
            let m = transition_submatrix(sys, &bs[j]);
            primitivity_check(&m) == Primitivity::Primitive && matrix::grows_exponentially(&m)
        }
    });
    if !driving {
        return Err(Error::domain(
            "no reachable primitive counted block with spectral radius above one",
        ));
    }
    let l = w.len();
    let bsub = block_substitution(sys, l)?;
    // Starting l-word: the prefix of a high enough iterate of `a`.
    let mut alpha: Word = vec![a.to_owned()];
    while alpha.len() < l {
        let next = sys.apply(&alpha);
        if next == alpha {
            return Err(Error::domain(format!(
                "iterates of {a:?} never reach length {l}"
            )));
        }
        alpha = next;
    }
    alpha.truncate(l);
    let dim = bsub.system.alphabet.len();
    let target = bsub.name_of(w);
    if target.is_none() {
        // The word never occurs in any iterate: the limit is exactly zero.
        return Ok(FrequencyEstimate {
            value: 0.0,
            tol: 0.0,
            iterations: 0,
            possibly_below_tolerance: false,
        });
    }
    let m = transition_matrix_sub(&bsub.system);
    let target_idx = bsub
        .system
        .alphabet
        .iter()
        .position(|x| x == target.unwrap())
        .unwrap();
    // Positions below the cutoff are those whose starting letter is counted.
    let counted: Vec<bool> = bsub
        .letter_words
        .iter()
        .map(|u| sys.block_of(&u[0]) < p)
        .collect();
    let start = bsub
        .name_of(&alpha)
        .and_then(|n| bsub.system.alphabet.iter().position(|x| x == n))
        .ok_or_else(|| Error::numeric("starting word is not an occurring word"))?;
    let mut v = vec![0.0f64; dim];
    v[start] = 1.0;
    let mut last = f64::NAN;
    // A single small successive gap can be an accidental plateau of the
    // integer count ratios; demand a sustained streak before stopping.
    let mut streak = 0usize;
    for it in 1..=FREQ_CAP {
        let mut next = vec![0.0f64; dim];
        for i in 0..dim {
            for j in 0..dim {
                next[i] += m[i][j] as f64 * v[j];
            }
        }
        let s: f64 = next.iter().sum();
        if s == 0.0 {
            return Err(Error::numeric("iteration collapsed to the zero vector"));
        }
        for x in next.iter_mut() {
            *x /= s;
        }
        v = next;
        let denom: f64 = v
            .iter()
            .zip(&counted)
            .filter(|(_, c)| **c)
            .map(|(x, _)| *x)
            .sum();
        if denom > 0.0 {
            let est = v[target_idx] / denom;
            let gap = (est - last).abs();
            if gap < FREQ_TOL {
                streak += 1;
                if streak >= 8 {
                    return Ok(FrequencyEstimate {
                        value: est,
                        tol: gap,
                        iterations: it,
                        possibly_below_tolerance: est < FREQ_TOL,
                    });
                }
            } else {
                streak = 0;
            }
            last = est;
        }
    }
    Err(Error::numeric(format!(
        "frequency iteration did not converge within {FREQ_CAP} steps"
    )))
}

#[derive(Debug, Clone)]
struct CountNode {
    /// Occurrences of the pattern.
    count: BigInt,
    /// Weighted length (letters below the cutoff).
    wlen: BigInt,
    len: BigInt,
    /// First `min(len, |w|-1)` letters.
    prefix: Word,
    /// Last `min(len, |w|-1)` letters.
    suffix: Word,
}

fn combine_counts(a: &CountNode, b: &CountNode, w: &[Letter], margin: usize) -> CountNode {
    // Occurrences spanning the junction start inside the stored suffix of
    // the left part; occurrences fully on either side are already counted.
    let mut s = a.suffix.clone();
    s.extend_from_slice(&b.prefix);
    let cross = if s.len() >= w.len() {
        (0..=s.len() - w.len())
            .filter(|&i| i < a.suffix.len() && &s[i..i + w.len()] == w)
            .count()
    } else {
        0
    };
    let mut prefix = a.prefix.clone();
    if prefix.len() < margin {
        prefix.extend_from_slice(&b.prefix);
        prefix.truncate(margin);
    }
    let mut suffix = b.suffix.clone();
    if suffix.len() < margin {
        let need = margin - suffix.len();
        let take = need.min(a.suffix.len());
        let mut front = a.suffix[a.suffix.len() - take..].to_vec();
        front.extend_from_slice(&b.suffix);
        suffix = front;
    }
    CountNode {
        count: &a.count + &b.count + BigInt::from(cross),
        wlen: &a.wlen + &b.wlen,
        len: &a.len + &b.len,
        prefix,
        suffix,
    }
}

/// Exact occurrence count of `w` in the `n`-th iterate of `a` together with
/// the weighted length, computed level by level over letters with junction
/// bookkeeping — no word is ever materialized, so deep iterates of growing
/// substitutions stay cheap.
pub fn exact_counts(
    sys: &SubstitutionSystem,
    a: &str,
    w: &[Letter],
    n: usize,
) -> Result<(BigInt, BigInt)> {
    if w.is_empty() {
        return Err(Error::domain("the counted word must be nonempty"));
    }
    if !sys.alphabet.iter().any(|x| x == a) {
        return Err(Error::structural(format!("unknown letter {a:?}")));
    }
    let margin = w.len() - 1;
    let p = sys.effective_p();
    let mut level: BTreeMap<Letter, CountNode> = sys
        .alphabet
        .iter()
        .map(|x| {
            let single = vec![x.clone()];
            (
                x.clone(),
                CountNode {
                    count: BigInt::from((w == single.as_slice()) as u64),
                    wlen: BigInt::from((sys.block_of(x) < p) as u64),
                    len: BigInt::from(1u64),
                    prefix: single[..margin.min(1)].to_vec(),
                    suffix: single[..margin.min(1)].to_vec(),
                },
            )
        })
        .collect();
    for _ in 0..n {
        let mut next = BTreeMap::new();
        for x in &sys.alphabet {
            let rule = &sys.rules[x];
            let mut acc = level[&rule[0]].clone();
            for y in &rule[1..] {
                acc = combine_counts(&acc, &level[y], w, margin);
            }
            next.insert(x.clone(), acc);
        }
        level = next;
    }
    let node = &level[a];
    Ok((node.count.clone(), node.wlen.clone()))
}

/// Exact frequency of `w` in the `n`-th iterate of `a` via [`exact_counts`].
pub fn exact_frequency(
    sys: &SubstitutionSystem,
    a: &str,
    w: &[Letter],
    n: usize,
) -> Result<BigRational> {
    let (num, den) = exact_counts(sys, a, w, n)?;
    if den == BigInt::from(0) {
        return Err(Error::domain("weighted length of the iterate is zero"));
    }
    Ok(BigRational::new(num, den))
}

/// Exact frequency at a finite stage: literally expand the `n`-th iterate
/// of `a` and divide the count of `w` by the weighted length.
pub fn brute_frequency_oracle(
    sys: &SubstitutionSystem,
    a: &str,
    w: &[Letter],
    n: usize,
) -> Result<BigRational> {
    let word = sys.expand(a, n)?;
    let num = count_word(&word, w);
    let den = sys.weighted_len(&word);
    if den == 0 {
        return Err(Error::domain("weighted length of the iterate is zero"));
    }
    Ok(BigRational::new(BigInt::from(num), BigInt::from(den)))
}
