//! Penner coordinates of Markoff vertices and the identities that force
//! every connected component of 𝒢_p to have size divisible by p.
//!
//! For a vertex `x` with `x1·x2·x3 ≠ 0` the associated triple is
//! `y_i = x_i / (3·x_j·x_k)`; when `x_i = 0` it is `1/2` in the two other
//! slots and `0` in slot `i`. Three facts then hold over F_p:
//!
//! * `y1 + y2 + y3 = 1` at every vertex;
//! * `y_m(x) + y_m(x') = 1` across every move-`m` edge `x — x'`
//!   (so `y_m = 1/2` at a move-`m` fixed point);
//! * summing over a Vieta-closed set `C` gives `Σ y_i = |C| / 2` for each i.
//!
//! Adding the last identity over `i` and comparing with the first yields
//! `|C| = 3|C|/2`, i.e. `|C| ≡ 0 (mod p)`.

use std::collections::HashSet;

use thiserror::Error;

use crate::field::{inverse_table, FastMod, FieldElement, FieldError, Prime};
use crate::surface::{other_slots, MarkoffTriple, SurfaceError, VertexIndex, VertexSet, VietaMove};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PennerError {
    #[error("Penner coordinates need p > 3 (got p = {0})")]
    UnsupportedModulus(u64),
    #[error("set is not closed under Vieta moves: move {mv} sends {vertex} outside it")]
    ClosureViolation { vertex: VertexIndex, mv: VietaMove },
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

fn require_large_prime(p: Prime) -> Result<(), PennerError> {
    if p.get() <= 3 {
        Err(PennerError::UnsupportedModulus(p.get()))
    } else {
        Ok(())
    }
}

/// The triple `(y1, y2, y3)` associated to a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PennerTriple {
    y: [FieldElement; 3],
}

impl PennerTriple {
    pub fn new(y: [FieldElement; 3]) -> Self {
        PennerTriple { y }
    }

    pub fn coords(&self) -> [FieldElement; 3] {
        self.y
    }

    pub fn residues(&self) -> [u64; 3] {
        self.y.map(FieldElement::residue)
    }

    pub fn get(&self, m: VietaMove) -> FieldElement {
        self.y[m.slot()]
    }
}

/// Penner coordinates of `x`. Refuses p ≤ 3, where 1/2 or 1/3 is missing.
pub fn penner_map(x: &MarkoffTriple) -> Result<PennerTriple, PennerError> {
    let p = x.prime();
    require_large_prime(p)?;
    let c = x.coords();
    let zeros: Vec<usize> = (0..3).filter(|&i| c[i].is_zero()).collect();
    assert!(
        zeros.len() <= 1,
        "vertex {x} has more than one zero coordinate"
    );

    let y = match zeros.first() {
        None => {
            let three = p.element(3);
            [0, 1, 2].map(|i| {
                let [j, k] = other_slots(i);
                let denom = (three * c[j] * c[k]).inv().expect("nonzero product");
                c[i] * denom
            })
        }
        Some(&i) => {
            let half = p.element(2).inv()?;
            let mut y = [half; 3];
            y[i] = p.zero();
            y
        }
    };
    Ok(PennerTriple { y })
}

/// `y1 + y2 + y3 = 1`.
pub fn check_affine_sum(y: &PennerTriple) -> bool {
    let [a, b, c] = y.y;
    (a + b + c).residue() == 1
}

/// `y_m(x) + y_m(vieta(x, m)) = 1`.
pub fn check_edge_identity(x: &MarkoffTriple, m: VietaMove) -> Result<bool, PennerError> {
    let y = penner_map(x)?;
    let y_next = penner_map(&x.vieta(m))?;
    Ok((y.get(m) + y_next.get(m)).residue() == 1)
}

/// `|C| mod p` and the three coordinate sums `Σ y_i` over a vertex set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComponentSums {
    pub size_mod_p: FieldElement,
    pub y_sums: [FieldElement; 3],
}

impl ComponentSums {
    /// `|C| / 2`, the value each coordinate sum must take.
    pub fn expected_sum(&self) -> FieldElement {
        let p = self.size_mod_p.modulus();
        self.size_mod_p * p.element(2).inv().expect("p is odd")
    }

    /// Each `Σ y_i` equals `|C| / 2`.
    pub fn identity_holds(&self) -> bool {
        let expected = self.expected_sum();
        self.y_sums.iter().all(|&s| s == expected)
    }
}

/// Sums Penner coordinates over a Vieta-closed vertex set, reducing mod p
/// throughout.
pub fn component_sums(component: &[VertexIndex], p: Prime) -> Result<ComponentSums, PennerError> {
    require_large_prime(p)?;
    let members: HashSet<VertexIndex> = component.iter().copied().collect();
    let mut y_sums = [p.zero(); 3];
    for &index in &members {
        let x = index.decode(p)?;
        for m in VietaMove::ALL {
            let next = x.vieta(m).encode()?;
            if !members.contains(&next) {
                return Err(PennerError::ClosureViolation {
                    vertex: index,
                    mv: m,
                });
            }
        }
        let y = penner_map(&x)?;
        for i in 0..3 {
            y_sums[i] = y_sums[i] + y.y[i];
        }
    }
    Ok(ComponentSums {
        size_mod_p: p.element(members.len() as u64),
        y_sums,
    })
}

/// True iff `p` divides the component size.
pub fn chen_verdict(component_size: u64, p: Prime) -> bool {
    component_size.is_multiple_of(p.get())
}

/// Penner coordinates from raw residues, for bulk evaluation.
///
/// Uses `x_i / (3·x_j·x_k) = x_i² / (3·x1·x2·x3)` so each vertex needs one
/// table lookup for the inverse.
#[derive(Debug, Clone)]
pub struct PennerEvaluator {
    modulus: u64,
    fm: FastMod,
    inv: Vec<u32>,
    half: u32,
}

impl PennerEvaluator {
    pub fn new(p: Prime) -> Result<Self, PennerError> {
        require_large_prime(p)?;
        let inv = inverse_table(p)?;
        Ok(PennerEvaluator {
            modulus: p.get(),
            fm: FastMod::new(p.get() as u32),
            half: inv[2],
            inv,
        })
    }

    /// `[a, b, c]` must be reduced residues of a vertex.
    #[inline]
    pub fn at(&self, [a, b, c]: [u64; 3]) -> [u32; 3] {
        debug_assert!(a.max(b).max(c) < self.modulus);
        let (fm, half) = (&self.fm, self.half);
        if a == 0 {
            [0, half, half]
        } else if b == 0 {
            [half, 0, half]
        } else if c == 0 {
            [half, half, 0]
        } else {
            let t = self.inv[fm.reduce(fm.reduce(3 * a * b) * c) as usize] as u64;
            [a, b, c].map(|x| fm.reduce(fm.reduce(x * x) * t) as u32)
        }
    }

    /// `y_i = x_i / (3·x_j·x_k)` alone.
    #[inline]
    pub fn coordinate(&self, x: [u64; 3], i: usize) -> u32 {
        let [j, k] = other_slots(i);
        if x[j] == 0 || x[k] == 0 {
            return self.half;
        }
        let denom = self.fm.reduce(3 * x[j] * x[k]);
        self.fm.reduce(x[i] * self.inv[denom as usize] as u64) as u32
    }
}

/// Penner coordinates of every vertex of a [`VertexSet`], as raw residues
/// indexed by dense position.
#[derive(Debug, Clone)]
pub struct PennerTable {
    prime: Prime,
    y: Vec<[u32; 3]>,
}

impl PennerTable {
    pub fn build(vertices: &VertexSet) -> Result<Self, PennerError> {
        let p = vertices.prime();
        let eval = PennerEvaluator::new(p)?;
        let mut y = vec![[0u32; 3]; vertices.len()];
        vertices.for_each_vertex(|pos, x| y[pos as usize] = eval.at(x));
        Ok(PennerTable { prime: p, y })
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    #[inline]
    pub fn at(&self, pos: u32) -> [u32; 3] {
        self.y[pos as usize]
    }

    pub fn triple(&self, pos: u32) -> PennerTriple {
        PennerTriple {
            y: self.y[pos as usize].map(|r| self.prime.element(r as u64)),
        }
    }
}
