//! The Markoff surface `x1² + x2² + x3² = 3·x1·x2·x3` over F_p.
//!
//! Vertices of the Markoff graph are the nonzero solutions; edges come from
//! the three Vieta involutions, each of which swaps one coordinate for the
//! other root of the quadratic it satisfies.

use std::fmt;

use thiserror::Error;

use crate::field::{FastMod, FieldElement, FieldError, Prime, SqrtTable};

/// Largest prime accepted by [`VertexSet::enumerate`].
///
/// Dense graph analysis at `p` needs roughly `45·p²` bytes (about 1.6 GB
/// here); 3·p² must also stay below 2³².
pub const MAX_GRAPH_PRIME: u64 = 6000;

/// Default ceiling for the O(p³) brute-force enumerator.
pub const DEFAULT_ORACLE_BOUND: u64 = 101;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SurfaceError {
    #[error("({x1}, {x2}, {x3}) is not a vertex of the Markoff graph mod {p}")]
    NotAVertex { x1: u64, x2: u64, x3: u64, p: u64 },
    #[error("code {code} does not encode a vertex mod {p}")]
    InvalidVertex { code: u64, p: u64 },
    #[error("brute-force enumeration refused: p = {p} exceeds the oracle bound {bound}")]
    AboveOracleBound { p: u64, bound: u64 },
    #[error("p = {p} is too large for dense graph analysis (limit {limit})")]
    TooLarge { p: u64, limit: u64 },
    #[error("invalid Vieta move {0}; expected 1, 2 or 3")]
    InvalidMove(u8),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// One of the three Vieta involutions, named by the coordinate it changes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VietaMove {
    First = 1,
    Second = 2,
    Third = 3,
}

impl VietaMove {
    pub const ALL: [VietaMove; 3] = [VietaMove::First, VietaMove::Second, VietaMove::Third];

    /// 1, 2 or 3.
    #[inline]
    pub fn number(self) -> u8 {
        self as u8
    }

    /// Zero-based coordinate slot.
    #[inline]
    pub fn slot(self) -> usize {
        self as usize - 1
    }

    pub fn from_slot(slot: usize) -> VietaMove {
        VietaMove::ALL[slot]
    }
}

impl TryFrom<u8> for VietaMove {
    type Error = SurfaceError;

    fn try_from(n: u8) -> Result<Self, SurfaceError> {
        match n {
            1 => Ok(VietaMove::First),
            2 => Ok(VietaMove::Second),
            3 => Ok(VietaMove::Third),
            other => Err(SurfaceError::InvalidMove(other)),
        }
    }
}

impl fmt::Display for VietaMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.number().fmt(f)
    }
}

/// True iff the triple solves the Markoff equation and is not `(0, 0, 0)`.
///
/// Panics if the coordinates do not share a modulus.
pub fn is_vertex(x: &[FieldElement; 3]) -> bool {
    let p = x[0].modulus();
    let three = p.element(3);
    let lhs = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    let rhs = three * x[0] * x[1] * x[2];
    lhs == rhs && x.iter().any(|c| !c.is_zero())
}

/// A vertex of the Markoff graph mod p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MarkoffTriple {
    coords: [FieldElement; 3],
}

impl MarkoffTriple {
    /// Reduces the coordinates mod p and checks the vertex predicate.
    pub fn new(p: Prime, coords: [u64; 3]) -> Result<Self, SurfaceError> {
        Self::from_elements(coords.map(|c| p.element(c)))
    }

    pub fn from_elements(coords: [FieldElement; 3]) -> Result<Self, SurfaceError> {
        if is_vertex(&coords) {
            Ok(MarkoffTriple { coords })
        } else {
            let [x1, x2, x3] = coords.map(FieldElement::residue);
            Err(SurfaceError::NotAVertex {
                x1,
                x2,
                x3,
                p: coords[0].modulus().get(),
            })
        }
    }

    /// The triple `(1, 1, 1)`, a vertex for every p.
    pub fn fundamental(p: Prime) -> Self {
        MarkoffTriple {
            coords: [p.one(); 3],
        }
    }

    #[inline]
    pub fn prime(&self) -> Prime {
        self.coords[0].modulus()
    }

    #[inline]
    pub fn coords(&self) -> [FieldElement; 3] {
        self.coords
    }

    #[inline]
    pub fn residues(&self) -> [u64; 3] {
        self.coords.map(FieldElement::residue)
    }

    #[inline]
    pub fn get(&self, m: VietaMove) -> FieldElement {
        self.coords[m.slot()]
    }

    /// Product of the two coordinates other than the one `m` changes.
    #[inline]
    pub fn other_product(&self, m: VietaMove) -> FieldElement {
        let [a, b] = other_slots(m.slot());
        self.coords[a] * self.coords[b]
    }

    /// Replaces coordinate `m` by `3·(product of the others) − x_m`.
    pub fn vieta(&self, m: VietaMove) -> MarkoffTriple {
        let three = self.prime().element(3);
        let mut coords = self.coords;
        coords[m.slot()] = three * self.other_product(m) - coords[m.slot()];
        debug_assert!(is_vertex(&coords));
        MarkoffTriple { coords }
    }

    /// Images under moves 1, 2, 3 in that order. Entries may repeat or
    /// equal `self`.
    pub fn neighbors(&self) -> [MarkoffTriple; 3] {
        VietaMove::ALL.map(|m| self.vieta(m))
    }

    /// Number of zero coordinates; never more than one on a vertex.
    pub fn zero_count(&self) -> usize {
        self.coords.iter().filter(|c| c.is_zero()).count()
    }

    pub fn encode(&self) -> Result<VertexIndex, SurfaceError> {
        VertexIndex::from_residues(self.prime(), self.residues())
    }
}

impl fmt::Display for MarkoffTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.residues();
        write!(f, "({a}, {b}, {c})")
    }
}

#[inline]
pub(crate) fn other_slots(slot: usize) -> [usize; 2] {
    match slot {
        0 => [1, 2],
        1 => [0, 2],
        _ => [0, 1],
    }
}

/// Largest modulus whose cube fits in a `u64` code.
pub const MAX_ENCODABLE_PRIME: u64 = 2_642_245;

/// Dense key `(x1·p + x2)·p + x3` of a triple over F_p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexIndex(pub u64);

impl VertexIndex {
    /// Encodes residues (each taken mod p). Fails when p³ overflows `u64`.
    pub fn from_residues(p: Prime, coords: [u64; 3]) -> Result<Self, SurfaceError> {
        let n = p.get();
        if n > MAX_ENCODABLE_PRIME {
            return Err(SurfaceError::TooLarge {
                p: n,
                limit: MAX_ENCODABLE_PRIME,
            });
        }
        let [a, b, c] = coords.map(|x| x % n);
        Ok(VertexIndex((a * n + b) * n + c))
    }

    /// Splits the code back into residues, without any vertex check.
    pub fn residues(self, p: Prime) -> [u64; 3] {
        let n = p.get();
        let c = self.0 % n;
        let ab = self.0 / n;
        [ab / n, ab % n, c]
    }

    /// Decodes and checks the vertex predicate.
    pub fn decode(self, p: Prime) -> Result<MarkoffTriple, SurfaceError> {
        let n = p.get();
        if n > MAX_ENCODABLE_PRIME || self.0 >= n * n * n {
            return Err(SurfaceError::InvalidVertex {
                code: self.0,
                p: p.get(),
            });
        }
        MarkoffTriple::new(p, self.residues(p)).map_err(|_| SurfaceError::InvalidVertex {
            code: self.0,
            p: p.get(),
        })
    }
}

impl fmt::Display for VertexIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Sentinel for "no such vertex" in dense position arrays.
pub const NO_POSITION: u32 = u32::MAX;

/// The full vertex set of 𝒢_p in ascending code order, with O(1) lookup of
/// a triple's dense position.
///
/// A "row" is a fixed `(x1, x2)` prefix; it holds at most two vertices
/// because `x3` is then a root of a monic quadratic.
#[derive(Debug, Clone)]
pub struct VertexSet {
    prime: Prime,
    codes: Vec<u64>,
    row_start: Vec<u32>,
}

impl VertexSet {
    /// Enumerates every nonzero solution.
    ///
    /// For odd p, each `(x1, x2)` row is solved for `x3` from
    /// `x3² − 3·x1·x2·x3 + (x1² + x2²) = 0` using a precomputed square-root
    /// table, which yields codes already in ascending order. p = 2 is
    /// handled by brute force.
    pub fn enumerate(p: Prime) -> Result<Self, SurfaceError> {
        let n = p.get();
        if n > MAX_GRAPH_PRIME {
            return Err(SurfaceError::TooLarge {
                p: n,
                limit: MAX_GRAPH_PRIME,
            });
        }
        if n == 2 {
            let codes = bruteforce_codes(p);
            return Ok(Self::from_sorted_codes(p, codes));
        }

        let table = SqrtTable::new(p)?;
        // root and number of distinct roots, per residue; 0 roots for
        // non-residues, so the row loop below needs no branch on residuosity
        let roots: Vec<(u64, usize)> = (0..n)
            .map(|d| match table.get_reduced(d) {
                Some(0) => (0, 1),
                Some(r) => (r, 2),
                None => (0, 0),
            })
            .collect();
        let squares: Vec<u64> = (0..n).map(|x| x * x % n).collect();
        let reduce = |x: u64| if x >= n { x - n } else { x };
        // (s mod p) / 2 for 0 <= s < 2p
        let halve = |s: u64| reduce((s + (s & 1) * n) >> 1);

        // p² + 3p bounds the vertex count; two spare slots absorb the
        // unconditional writes below
        let mut codes = vec![0u64; (n * n + 3 * n + 2) as usize];
        let mut len = 0usize;
        let mut row_start = Vec::with_capacity((n * n + 1) as usize);
        for x1 in 0..n {
            let step = reduce(3 * x1 % n);
            let mut b = 0; // 3·x1·x2
            for x2 in 0..n {
                row_start.push(len as u32);
                let c = reduce(squares[x1 as usize] + squares[x2 as usize]);
                let c4 = reduce(reduce(c + c) + reduce(c + c));
                let disc = reduce(squares[b as usize] + n - c4);
                let (r, count) = roots[disc as usize];
                let base = (x1 * n + x2) * n;
                let (u, v) = (halve(b + n - r), halve(b + r));
                codes[len] = base + u.min(v);
                codes[len + 1] = base + u.max(v);
                // the row (0, 0) holds only the excluded origin
                len += if x1 == 0 && x2 == 0 { 0 } else { count };
                b = reduce(b + step);
            }
        }
        row_start.push(len as u32);
        codes.truncate(len);
        Ok(VertexSet {
            prime: p,
            codes,
            row_start,
        })
    }

    fn from_sorted_codes(p: Prime, codes: Vec<u64>) -> Self {
        let n = p.get();
        let rows = (n * n) as usize;
        let mut row_start = vec![0u32; rows + 1];
        for &code in &codes {
            row_start[(code / n) as usize + 1] += 1;
        }
        for i in 0..rows {
            row_start[i + 1] += row_start[i];
        }
        VertexSet {
            prime: p,
            codes,
            row_start,
        }
    }

    #[inline]
    pub fn prime(&self) -> Prime {
        self.prime
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.codes.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// Ascending vertex codes.
    #[inline]
    pub fn codes(&self) -> &[u64] {
        &self.codes
    }

    pub fn indices(&self) -> Vec<VertexIndex> {
        self.codes.iter().map(|&c| VertexIndex(c)).collect()
    }

    #[inline]
    pub fn code(&self, pos: u32) -> VertexIndex {
        VertexIndex(self.codes[pos as usize])
    }

    #[inline]
    pub fn coords(&self, pos: u32) -> [u64; 3] {
        let n = self.prime.get();
        let code = self.codes[pos as usize];
        let ab = code / n;
        [ab / n, ab % n, code % n]
    }

    pub fn triple(&self, pos: u32) -> MarkoffTriple {
        MarkoffTriple::new(self.prime, self.coords(pos)).expect("enumerated vertex")
    }

    /// Dense position of the triple, if it is a vertex.
    #[inline]
    pub fn position_of(&self, coords: [u64; 3]) -> Option<u32> {
        let n = self.prime.get();
        let row = (coords[0] * n + coords[1]) as usize;
        let target = row as u64 * n + coords[2];
        (self.row_start[row]..self.row_start[row + 1]).find(|&i| self.codes[i as usize] == target)
    }

    pub fn position(&self, index: VertexIndex) -> Option<u32> {
        let n = self.prime.get();
        if index.0 >= n * n * n {
            return None;
        }
        self.position_of(index.residues(self.prime))
    }

    /// Vertices in the row of prefix `(x1, x2)`.
    pub fn row(&self, x1: u64, x2: u64) -> std::ops::Range<u32> {
        let row = (x1 * self.prime.get() + x2) as usize;
        self.row_start[row]..self.row_start[row + 1]
    }

    /// Calls `f(position, [x1, x2, x3])` for every vertex in order, without
    /// dividing codes back into coordinates.
    pub fn for_each_vertex(&self, mut f: impl FnMut(u32, [u64; 3])) {
        let n = self.prime.get();
        for x1 in 0..n {
            for x2 in 0..n {
                let row = x1 * n + x2;
                for pos in self.row_start[row as usize]..self.row_start[row as usize + 1] {
                    f(pos, [x1, x2, self.codes[pos as usize] - row * n]);
                }
            }
        }
    }

    /// Neighbor positions of every vertex, in move order.
    ///
    /// Move 3 never leaves the `(x1, x2)` row: its image is the row's other
    /// root, or the vertex itself when the row holds a double root.
    pub fn neighbor_table(&self) -> Vec<[u32; 3]> {
        let n = self.prime.get();
        if n == 2 {
            return (0..self.len() as u32)
                .map(|pos| self.neighbor_positions(pos))
                .collect();
        }
        let fm = FastMod::new(n as u32);
        let sub = |t: u64, x: u64| if t >= x { t - x } else { t + n - x };
        // The roots of row (u, v) are x3 and 3uv - x3 and are stored
        // ascending, so x3's slot follows from one comparison and the codes
        // never need to be read.
        let locate = |u: u64, v: u64, x3: u64| {
            let other = sub(fm.reduce(3 * u * v), x3);
            self.row_start[(u * n + v) as usize] + (x3 > other) as u32
        };
        let mut table = vec![[0u32; 3]; self.len()];
        // Move 1 lands in an unrelated row; those lookups are queued a few
        // vertices deep so the loads overlap.
        const DEPTH: usize = 16;
        let mut pending = [(0u32, 0u32, 0u32); DEPTH];
        let mut head = 0usize;
        self.for_each_vertex(|pos, [a, b, c]| {
            let row = a * n + b;
            let (s, e) = (
                self.row_start[row as usize],
                self.row_start[row as usize + 1],
            );
            let third = if e - s == 2 { s + e - 1 - pos } else { pos };
            let a_next = sub(fm.reduce(3 * b * c), a);
            let b_next = sub(fm.reduce(3 * a * c), b);
            let far = a_next * n + b;
            prefetch(&self.row_start[far as usize]);
            let offset = (c > sub(fm.reduce(3 * a_next * b), c)) as u32;
            table[pos as usize] = [0, locate(a, b_next, c), third];
            let slot = &mut pending[head % DEPTH];
            if head >= DEPTH {
                let (p, r, o) = *slot;
                table[p as usize][0] = self.row_start[r as usize] + o;
            }
            *slot = (pos, far as u32, offset);
            head += 1;
        });
        for i in head.saturating_sub(DEPTH)..head {
            let (p, r, o) = pending[i % DEPTH];
            table[p as usize][0] = self.row_start[r as usize] + o;
        }
        table
    }

    /// Positions of the three Vieta images, in move order.
    #[inline]
    pub fn neighbor_positions(&self, pos: u32) -> [u32; 3] {
        let n = self.prime.get();
        let [a, b, c] = self.coords(pos);
        let m1 = (3 * b % n * c + n - a) % n;
        let m2 = (3 * a % n * c + n - b) % n;
        let m3 = (3 * a % n * b + n - c) % n;
        [[m1, b, c], [a, m2, c], [a, b, m3]]
            .map(|t| self.position_of(t).expect("Vieta image is a vertex"))
    }
}

#[inline(always)]
pub(crate) fn prefetch<T>(x: &T) {
    #[cfg(target_arch = "x86_64")]
    // SAFETY: prefetching is a hint and never faults.
    unsafe {
        use std::arch::x86_64::{_mm_prefetch, _MM_HINT_T0};
        _mm_prefetch::<_MM_HINT_T0>(x as *const T as *const i8);
    }
    #[cfg(not(target_arch = "x86_64"))]
    let _ = x;
}

/// Every vertex code mod p, ascending.
pub fn enumerate_vertices(p: Prime) -> Result<Vec<VertexIndex>, SurfaceError> {
    Ok(VertexSet::enumerate(p)?.indices())
}

/// O(p³) scan of all triples with [`is_vertex`]; the oracle for
/// [`enumerate_vertices`]. Refuses `p > bound`.
pub fn enumerate_bruteforce(p: Prime, bound: u64) -> Result<Vec<VertexIndex>, SurfaceError> {
    if p.get() > bound {
        return Err(SurfaceError::AboveOracleBound { p: p.get(), bound });
    }
    Ok(bruteforce_codes(p).into_iter().map(VertexIndex).collect())
}

fn bruteforce_codes(p: Prime) -> Vec<u64> {
    let n = p.get();
    let mut codes = Vec::new();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if is_vertex(&[a, b, c].map(|x| p.element(x))) {
                    codes.push((a * n + b) * n + c);
                }
            }
        }
    }
    codes
}
