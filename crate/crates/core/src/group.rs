//! The standard presentation of the closed genus-g surface group, freely
//! reduced words, and Cayley-ball enumeration by breadth-first search with
//! matrix deduplication.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::rep::Representation;
use crate::tolerance;

/// `⟨a_1, b_1, …, a_g, b_g | [a_1, b_1] ··· [a_g, b_g]⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Presentation {
    genus: usize,
}

impl Presentation {
    pub fn new(genus: usize) -> Result<Self> {
        if genus < 2 {
            return Err(Error::InvalidArgument(format!(
                "surface group genus must be at least 2, got {genus}"
            )));
        }
        Ok(Presentation { genus })
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    /// Number of generators `2g`.
    pub fn generator_count(&self) -> usize {
        2 * self.genus
    }

    /// Number of letters `4g` (generators and their inverses).
    pub fn alphabet_size(&self) -> usize {
        4 * self.genus
    }

    /// All letters, generators first in the order `a_1, b_1, …`, then their
    /// inverses in the same order.
    pub fn alphabet(&self) -> Vec<Letter> {
        let g = self.generator_count();
        (0..g)
            .map(Letter::generator)
            .chain((0..g).map(|i| Letter::generator(i).inverse()))
            .collect()
    }

    pub fn relator(&self) -> Word {
        let mut letters = Vec::with_capacity(4 * self.genus);
        for j in 0..self.genus {
            let a = Letter::generator(2 * j);
            let b = Letter::generator(2 * j + 1);
            letters.extend([a, b, a.inverse(), b.inverse()]);
        }
        Word::new(letters).expect("the surface relator is freely reduced")
    }

    pub fn contains(&self, letter: Letter) -> bool {
        letter.generator < self.generator_count()
    }
}

/// A generator (index `2(j-1)` for `a_j`, `2(j-1)+1` for `b_j`) or its
/// inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Letter {
    generator: usize,
    inverse: bool,
}

impl Letter {
    pub fn generator(index: usize) -> Self {
        Letter {
            generator: index,
            inverse: false,
        }
    }

    pub fn index(&self) -> usize {
        self.generator
    }

    pub fn is_inverse(&self) -> bool {
        self.inverse
    }

    pub fn inverse(self) -> Self {
        Letter {
            generator: self.generator,
            inverse: !self.inverse,
        }
    }
}

impl fmt::Display for Letter {
    /// `a1`, `b1`, … for generators; `A1`, `B1`, … for inverses.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match (self.generator % 2, self.inverse) {
            (0, false) => 'a',
            (1, false) => 'b',
            (0, true) => 'A',
            _ => 'B',
        };
        write!(f, "{}{}", name, self.generator / 2 + 1)
    }
}

impl FromStr for Letter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut chars = s.chars();
        let head = chars.next().ok_or_else(|| Error::UnknownLetter(s.to_string()))?;
        let (offset, inverse) = match head {
            'a' => (0, false),
            'b' => (1, false),
            'A' => (0, true),
            'B' => (1, true),
            _ => return Err(Error::UnknownLetter(s.to_string())),
        };
        let j: usize = chars
            .as_str()
            .parse()
            .map_err(|_| Error::UnknownLetter(s.to_string()))?;
        if j == 0 {
            return Err(Error::UnknownLetter(s.to_string()));
        }
        Ok(Letter {
            generator: 2 * (j - 1) + offset,
            inverse,
        })
    }
}

/// A freely reduced word.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    /// Rejects words containing a letter next to its inverse.
    pub fn new(letters: Vec<Letter>) -> Result<Self> {
        if let Some(position) = letters.windows(2).position(|w| w[0] == w[1].inverse()) {
            return Err(Error::NotReduced { position });
        }
        Ok(Word { letters })
    }

    pub fn identity() -> Self {
        Word::default()
    }

    /// Free reduction of an arbitrary letter sequence.
    pub fn reduce(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word { letters: out }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn last(&self) -> Option<Letter> {
        self.letters.last().copied()
    }

    pub fn inverse(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    /// Free reduction of the concatenation.
    pub fn concat(&self, other: &Word) -> Word {
        Word::reduce(self.letters.iter().chain(other.letters.iter()).copied())
    }

    /// Appends a letter, which must not cancel the last one.
    pub fn push(&self, letter: Letter) -> Result<Word> {
        if self.last() == Some(letter.inverse()) {
            return Err(Error::NotReduced {
                position: self.letters.len() - 1,
            });
        }
        let mut letters = self.letters.clone();
        letters.push(letter);
        Ok(Word { letters })
    }
}

impl fmt::Display for Word {
    /// Space-separated letters; the empty word prints as `e`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "e");
        }
        let parts: Vec<String> = self.letters.iter().map(|l| l.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Whitespace-separated letters; `e` or the empty string is the identity.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "e" {
            return Ok(Word::identity());
        }
        let letters = s
            .split_whitespace()
            .map(Letter::from_str)
            .collect::<Result<Vec<_>>>()?;
        Word::new(letters)
    }
}

/// A group element found by the ball search.
#[derive(Debug, Clone)]
pub struct BallElement {
    /// A geodesic representative.
    pub word: Word,
    /// `ρ(word)`.
    pub matrix: Mat,
    /// `ρ(word)⁻¹`, accumulated from generator inverses.
    pub inverse: Mat,
    /// Image under the base Fuchsian representation when one is attached.
    pub base: Option<Mat>,
}

impl BallElement {
    pub fn length(&self) -> usize {
        self.word.len()
    }
}

/// Knobs for [`enumerate_ball_with`].
#[derive(Debug, Clone, Copy)]
pub struct BallOptions {
    /// Relative distance below which distinct words are an ambiguity.
    pub dedup: f64,
    /// Relative distance below which two words give the same element.
    pub same: f64,
    /// Maximum number of elements; the search stops early once reached.
    pub budget: usize,
}

impl Default for BallOptions {
    fn default() -> Self {
        let t = tolerance::current();
        BallOptions {
            dedup: t.dedup,
            same: t.same,
            budget: 1_000_000,
        }
    }
}

/// All elements of word length at most `radius`, ordered by length.
#[derive(Debug, Clone)]
pub struct Ball {
    pub radius: usize,
    pub elements: Vec<BallElement>,
    /// `sphere_sizes[r]` counts elements of length exactly `r`.
    pub sphere_sizes: Vec<usize>,
    /// The element budget ran out; the last sphere is incomplete.
    pub truncated: bool,
}

impl Ball {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn sphere(&self, r: usize) -> &[BallElement] {
        let start: usize = self.sphere_sizes.iter().take(r).sum();
        let len = self.sphere_sizes.get(r).copied().unwrap_or(0);
        &self.elements[start.min(self.elements.len())..(start + len).min(self.elements.len())]
    }

    /// Index of the element represented by `m` (compared on the same key as
    /// the search: base image when present, else the representation image).
    pub fn find(&self, key: &Mat, tol: f64) -> Option<usize> {
        self.elements
            .iter()
            .position(|e| relative_distance(e.base.as_ref().unwrap_or(&e.matrix), key) < tol)
    }
}

const GRID: f64 = 1e-4;

/// `max |A - B| / max(1, max |A|, max |B|)`.
pub fn relative_distance(a: &Mat, b: &Mat) -> f64 {
    let scale = a.amax().max(b.amax()).max(1.0);
    (a - b).amax() / scale
}

struct DedupTable {
    cells: HashMap<Vec<i64>, Vec<usize>>,
    keys: Vec<Mat>,
    options: BallOptions,
}

enum Lookup {
    Found,
    New,
}

impl DedupTable {
    fn new(options: BallOptions) -> Self {
        DedupTable {
            cells: HashMap::new(),
            keys: Vec::new(),
            options,
        }
    }

    fn normalized(key: &Mat) -> Vec<f64> {
        let scale = key.amax().max(1.0);
        key.iter().map(|x| x / scale).collect()
    }

    fn home_cell(coords: &[f64]) -> Vec<i64> {
        coords.iter().map(|x| (x / GRID).round() as i64).collect()
    }

    /// The home cell plus every neighbour across a nearby cell boundary.
    fn probe_cells(&self, coords: &[f64]) -> Vec<Vec<i64>> {
        let reach = 2.0 * self.options.dedup;
        let mut cells = vec![Vec::with_capacity(coords.len())];
        for &x in coords {
            let c = (x / GRID).round();
            let mut options = vec![c as i64];
            let frac = x / GRID - c;
            if (0.5 - frac.abs()) * GRID < reach {
                options.push(c as i64 + if frac > 0.0 { 1 } else { -1 });
            }
            let mut next = Vec::with_capacity(cells.len() * options.len());
            for cell in &cells {
                for &o in &options {
                    let mut extended = cell.clone();
                    extended.push(o);
                    next.push(extended);
                }
            }
            cells = next;
        }
        cells
    }

    fn lookup(&self, key: &Mat, depth: usize) -> Result<Lookup> {
        let coords = Self::normalized(key);
        for cell in self.probe_cells(&coords) {
            if let Some(ids) = self.cells.get(&cell) {
                for &id in ids {
                    let distance = relative_distance(&self.keys[id], key);
                    if distance < self.options.same {
                        return Ok(Lookup::Found);
                    }
                    if distance < self.options.dedup {
                        return Err(Error::AmbiguousElement { depth, distance });
                    }
                }
            }
        }
        Ok(Lookup::New)
    }

    fn insert(&mut self, key: Mat) {
        let cell = Self::home_cell(&Self::normalized(&key));
        self.cells.entry(cell).or_default().push(self.keys.len());
        self.keys.push(key);
    }
}

/// [`enumerate_ball_with`] using the installed tolerances and the default
/// budget of one million elements.
pub fn enumerate_ball(rep: &Representation, radius: usize) -> Result<Ball> {
    enumerate_ball_with(rep, radius, BallOptions::default())
}

/// Breadth-first search over right multiplication by letters. Elements are
/// identified by their base Fuchsian image when the representation carries
/// one, otherwise by their own image; each element keeps the word by which
/// it was first reached, which is geodesic.
pub fn enumerate_ball_with(rep: &Representation, radius: usize, options: BallOptions) -> Result<Ball> {
    if !(options.same > 0.0 && options.same < options.dedup) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < same ({}) < dedup ({})",
            options.same, options.dedup
        )));
    }
    let alphabet = rep.presentation().alphabet();
    let base = rep.base();
    let identity = BallElement {
        word: Word::identity(),
        matrix: Mat::identity(rep.dim(), rep.dim()),
        inverse: Mat::identity(rep.dim(), rep.dim()),
        base: base.map(|_| Mat::identity(2, 2)),
    };
    let mut table = DedupTable::new(options);
    table.insert(identity.base.clone().unwrap_or_else(|| identity.matrix.clone()));
    let mut elements = vec![identity];
    let mut sphere_sizes = vec![1];
    let mut frontier = 0..1;
    let mut truncated = false;

    for depth in 1..=radius {
        let candidates: Vec<BallElement> = elements[frontier.clone()]
            .par_iter()
            .flat_map_iter(|x| {
                alphabet
                    .iter()
                    .filter(move |l| x.last_letter() != Some(l.inverse()))
                    .map(move |&l| BallElement {
                        word: x.word.push(l).expect("filtered cancellation"),
                        matrix: &x.matrix * rep.letter_image(l),
                        inverse: rep.letter_image(l.inverse()) * &x.inverse,
                        base: x
                            .base
                            .as_ref()
                            .map(|b| b * base.expect("base present").letter_image(l)),
                    })
            })
            .collect();
        let start = elements.len();
        for c in candidates {
            let key = c.base.as_ref().unwrap_or(&c.matrix);
            if let Lookup::New = table.lookup(key, depth)? {
                if elements.len() >= options.budget {
                    truncated = true;
                    break;
                }
                table.insert(key.clone());
                elements.push(c);
            }
        }
        sphere_sizes.push(elements.len() - start);
        frontier = start..elements.len();
        if truncated {
            break;
        }
    }
    Ok(Ball {
        radius,
        elements,
        sphere_sizes,
        truncated,
    })
}

impl BallElement {
    fn last_letter(&self) -> Option<Letter> {
        self.word.last()
    }
}

/// Ordered product of generator images along `w`.
pub fn word_value(rep: &Representation, w: &Word) -> Mat {
    rep.word_value(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presentations() {
        let p = Presentation::new(2).unwrap();
        assert_eq!(p.generator_count(), 4);
        assert_eq!(p.alphabet_size(), 8);
        assert_eq!(p.alphabet().len(), 8);
        assert_eq!(p.relator().len(), 8);
        assert_eq!(p.relator().to_string(), "a1 b1 A1 B1 a2 b2 A2 B2");
        let p3 = Presentation::new(3).unwrap();
        assert_eq!(p3.generator_count(), 6);
        assert_eq!(p3.relator().len(), 12);
        assert!(Presentation::new(1).is_err());
    }

    #[test]
    fn words_are_reduced() {
        assert!(matches!(
            "a1 A1".parse::<Word>(),
            Err(Error::NotReduced { position: 0 })
        ));
        let w: Word = "a1 b2 B1".parse().unwrap();
        assert_eq!(w.len(), 3);
        assert_eq!(w.inverse().to_string(), "b1 B2 A1");
        assert!(w.concat(&w.inverse()).is_empty());
        assert_eq!("e".parse::<Word>().unwrap(), Word::identity());
        assert!("c1".parse::<Word>().is_err());
        assert!("a0".parse::<Word>().is_err());
        assert!(Word::identity().push(Letter::generator(0)).is_ok());
    }
}
