//! Connected components of 𝒢_p, shortest move paths, and lifting vertices
//! to integer Markoff triples.

use std::collections::VecDeque;
use std::fmt;

use num_bigint::BigUint;
use num_traits::One;
use thiserror::Error;

use crate::field::{FastMod, Prime};
use crate::penner::{chen_verdict, ComponentSums, PennerError, PennerEvaluator};
use crate::surface::{
    other_slots, MarkoffTriple, SurfaceError, VertexIndex, VertexSet, VietaMove, NO_POSITION,
};

/// Default cap on the length of a lifting path.
pub const DEFAULT_MAX_LIFT_MOVES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Penner(#[from] PennerError),
    #[error("lifting path has {len} moves, above the limit of {limit}")]
    PathTooLong { len: usize, limit: usize },
}

/// Union-find over dense positions, with path compression and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(len: usize) -> Self {
        UnionFind {
            parent: (0..len as u32).collect(),
            size: vec![1; len],
        }
    }

    pub fn find(&mut self, mut x: u32) -> u32 {
        let mut root = x;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        while x != root {
            x = std::mem::replace(&mut self.parent[x as usize], root);
        }
        root
    }

    /// Returns false when `a` and `b` were already joined.
    pub fn union(&mut self, a: u32, b: u32) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a as usize] < self.size[b as usize] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b as usize] = a;
        self.size[a as usize] += self.size[b as usize];
        true
    }

    pub fn set_size(&mut self, x: u32) -> u32 {
        let r = self.find(x);
        self.size[r as usize]
    }
}

/// One connected component of 𝒢_p.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentSummary {
    /// Smallest vertex code in the component.
    pub representative: VertexIndex,
    pub size: u64,
    /// `p` divides `size`.
    pub chen_ok: bool,
    /// Present for p > 3 when Penner checks are enabled.
    pub penner_sums: Option<ComponentSums>,
}

/// Outcome of the Penner-coordinate identities over a whole graph.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PennerReport {
    pub vertices_checked: u64,
    pub affine_failures: u64,
    pub first_affine_failure: Option<VertexIndex>,
    pub edges_checked: u64,
    pub edge_failures: u64,
    pub first_edge_failure: Option<(VertexIndex, VietaMove)>,
    pub components_checked: u64,
    pub component_failures: u64,
    pub first_component_failure: Option<VertexIndex>,
}

impl PennerReport {
    pub fn all_ok(&self) -> bool {
        self.affine_failures == 0 && self.edge_failures == 0 && self.component_failures == 0
    }
}

/// Number of vertices fixed by each move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SelfLoopCensus {
    pub counts: [u64; 3],
    /// Vertices where "fixed by move m" disagreed with `2·x_m = 3·x_j·x_k`.
    pub criterion_mismatches: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphOptions {
    pub penner_checks: bool,
}

impl Default for GraphOptions {
    fn default() -> Self {
        GraphOptions {
            penner_checks: true,
        }
    }
}

/// The Markoff graph mod p with its component decomposition.
#[derive(Debug, Clone)]
pub struct MarkoffGraph {
    vertices: VertexSet,
    neighbors: Vec<[u32; 3]>,
    component_of: Vec<u32>,
    components: Vec<ComponentSummary>,
    penner: Option<PennerReport>,
}

impl MarkoffGraph {
    pub fn build(p: Prime) -> Result<Self, GraphError> {
        Self::build_with(p, GraphOptions::default())
    }

    pub fn build_with(p: Prime, options: GraphOptions) -> Result<Self, GraphError> {
        let vertices = VertexSet::enumerate(p)?;
        let n = vertices.len();
        let neighbors = vertices.neighbor_table();

        // Moves 2 and 3 keep x1 fixed, so along them alone every vertex has
        // at most two neighbors inside its x1 block: the pieces they cut out
        // are paths and cycles, labeled here by walking them. Move-1 edges
        // then join pieces, of which there are few.
        let mut piece_of = vec![NO_POSITION; n];
        let mut pieces = 0u32;
        for start in 0..n {
            if piece_of[start] != NO_POSITION {
                continue;
            }
            piece_of[start] = pieces;
            // Walk both ways from `start`, alternating the two moves.
            for first in [1, 2] {
                let (mut cur, mut slot) = (start, first);
                loop {
                    let next = neighbors[cur][slot] as usize;
                    if piece_of[next] != NO_POSITION {
                        break;
                    }
                    piece_of[next] = pieces;
                    cur = next;
                    slot = 3 - slot;
                }
            }
            pieces += 1;
        }

        let mut joined = UnionFind::new(pieces as usize);
        const AHEAD: usize = 16;
        for pos in 0..n {
            if let Some(ahead) = neighbors.get(pos + AHEAD) {
                crate::surface::prefetch(&piece_of[ahead[0] as usize]);
            }
            let v = neighbors[pos][0] as usize;
            joined.union(piece_of[pos], piece_of[v]);
        }

        // Positions ascend with codes, so numbering roots on first sight
        // sorts components by their smallest code.
        let mut component_of = piece_of;
        let mut root_component = vec![NO_POSITION; pieces as usize];
        let mut components = Vec::new();
        for pos in 0..n {
            let root = joined.find(component_of[pos]);
            let slot = &mut root_component[root as usize];
            if *slot == NO_POSITION {
                *slot = components.len() as u32;
                components.push(ComponentSummary {
                    representative: vertices.code(pos as u32),
                    size: 0,
                    chen_ok: false,
                    penner_sums: None,
                });
            }
            components[*slot as usize].size += 1;
            component_of[pos] = *slot;
        }
        for c in &mut components {
            c.chen_ok = chen_verdict(c.size, p);
        }

        let penner = if options.penner_checks && p.get() > 3 {
            let eval = PennerEvaluator::new(p)?;
            Some(check_penner(
                &vertices,
                &eval,
                &component_of,
                &mut components,
            ))
        } else {
            None
        };

        Ok(MarkoffGraph {
            vertices,
            neighbors,
            component_of,
            components,
            penner,
        })
    }

    pub fn prime(&self) -> Prime {
        self.vertices.prime()
    }

    pub fn vertices(&self) -> &VertexSet {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Components sorted by representative.
    pub fn components(&self) -> &[ComponentSummary] {
        &self.components
    }

    pub fn is_connected(&self) -> bool {
        self.components.len() == 1
    }

    /// Component sizes, largest first.
    pub fn component_sizes(&self) -> Vec<u64> {
        let mut sizes: Vec<u64> = self.components.iter().map(|c| c.size).collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    }

    pub fn chen_ok_all(&self) -> bool {
        self.components.iter().all(|c| c.chen_ok)
    }

    pub fn penner_report(&self) -> Option<&PennerReport> {
        self.penner.as_ref()
    }

    /// Index into [`components`](Self::components) of the vertex's component.
    pub fn component_of(&self, index: VertexIndex) -> Result<usize, GraphError> {
        let pos = self.require_position(index)?;
        Ok(self.component_of[pos as usize] as usize)
    }

    pub fn same_component(&self, a: VertexIndex, b: VertexIndex) -> Result<bool, GraphError> {
        Ok(self.component_of(a)? == self.component_of(b)?)
    }

    /// Vertex codes of one component, ascending.
    pub fn component_members(&self, component: usize) -> Vec<VertexIndex> {
        (0..self.vertex_count() as u32)
            .filter(|&pos| self.component_of[pos as usize] as usize == component)
            .map(|pos| self.vertices.code(pos))
            .collect()
    }

    fn require_position(&self, index: VertexIndex) -> Result<u32, GraphError> {
        self.vertices.position(index).ok_or_else(|| {
            SurfaceError::InvalidVertex {
                code: index.0,
                p: self.prime().get(),
            }
            .into()
        })
    }

    /// Neighbor positions of the vertex at `pos`, in move order.
    #[inline]
    pub fn neighbors_of(&self, pos: u32) -> [u32; 3] {
        self.neighbors[pos as usize]
    }

    pub fn selfloop_census(&self) -> SelfLoopCensus {
        let n = self.prime().get();
        let fm = FastMod::new(n as u32);
        let mut census = SelfLoopCensus::default();
        self.vertices.for_each_vertex(|pos, x| {
            let next = self.neighbors[pos as usize];
            for slot in 0..3 {
                let fixed = next[slot] == pos;
                let [j, k] = other_slots(slot);
                let twice = if 2 * x[slot] >= n {
                    2 * x[slot] - n
                } else {
                    2 * x[slot]
                };
                let criterion = twice == fm.reduce(3 * x[j] * x[k]);
                if fixed {
                    census.counts[slot] += 1;
                }
                if fixed != criterion {
                    census.criterion_mismatches += 1;
                }
            }
        });
        census
    }

    /// A shortest move sequence from `from` to `to`, or `None` when they
    /// lie in different components.
    ///
    /// Among shortest paths, the one whose move sequence is
    /// lexicographically smallest is returned.
    pub fn bfs_path(
        &self,
        from: VertexIndex,
        to: VertexIndex,
    ) -> Result<Option<MovePath>, GraphError> {
        let start = self.require_position(from)?;
        let goal = self.require_position(to)?;
        if self.component_of[start as usize] != self.component_of[goal as usize] {
            return Ok(None);
        }
        if start == goal {
            return Ok(Some(MovePath::default()));
        }

        // Distances to `goal`; the search stops once `start` is labeled,
        // by which point every vertex closer to `goal` is labeled too.
        let mut dist = vec![u32::MAX; self.vertex_count()];
        dist[goal as usize] = 0;
        let mut queue = VecDeque::from([goal]);
        'search: while let Some(u) = queue.pop_front() {
            for v in self.neighbors[u as usize] {
                if dist[v as usize] == u32::MAX {
                    dist[v as usize] = dist[u as usize] + 1;
                    if v == start {
                        break 'search;
                    }
                    queue.push_back(v);
                }
            }
        }

        let mut moves = Vec::with_capacity(dist[start as usize] as usize);
        let mut at = start;
        while at != goal {
            let d = dist[at as usize];
            let next = self.neighbors[at as usize];
            let slot = (0..3)
                .find(|&s| dist[next[s] as usize] == d - 1)
                .expect("a neighbor one step closer");
            moves.push(VietaMove::from_slot(slot));
            at = next[slot];
        }
        Ok(Some(MovePath(moves)))
    }

    /// Lifts `target` to an integer Markoff triple by replaying a shortest
    /// path from `(1, 1, 1)` over ℤ. `None` when `target` is outside the
    /// component of `(1, 1, 1)`.
    pub fn lift_to_integers(
        &self,
        target: VertexIndex,
        max_moves: usize,
    ) -> Result<Option<Lift>, GraphError> {
        let base = MarkoffTriple::fundamental(self.prime()).encode()?;
        let Some(path) = self.bfs_path(base, target)? else {
            return Ok(None);
        };
        if path.len() > max_moves {
            return Err(GraphError::PathTooLong {
                len: path.len(),
                limit: max_moves,
            });
        }
        let triple = path.replay_integers(IntegerTriple::fundamental());
        Ok(Some(Lift { path, triple }))
    }
}

/// Evaluates the three Penner identities. Each edge image is rebuilt from
/// the vertex's own coordinates rather than looked up, which keeps the pass
/// sequential in memory.
fn check_penner(
    vertices: &VertexSet,
    eval: &PennerEvaluator,
    component_of: &[u32],
    components: &mut [ComponentSummary],
) -> PennerReport {
    let p = vertices.prime();
    let n = p.get();
    let fm = FastMod::new(n as u32);
    let mut report = PennerReport::default();
    let mut sums = vec![[0u64; 3]; components.len()];

    vertices.for_each_vertex(|pos, x| {
        let y = eval.at(x);
        report.vertices_checked += 1;
        if (y[0] as u64 + y[1] as u64 + y[2] as u64) % n != 1 {
            report.affine_failures += 1;
            report
                .first_affine_failure
                .get_or_insert(vertices.code(pos));
        }
        for slot in 0..3 {
            let [j, k] = other_slots(slot);
            let mut image = x;
            image[slot] = (fm.reduce(3 * x[j] * x[k]) + n - x[slot]) % n;
            report.edges_checked += 1;
            if (y[slot] as u64 + eval.coordinate(image, slot) as u64) % n != 1 {
                report.edge_failures += 1;
                report
                    .first_edge_failure
                    .get_or_insert((vertices.code(pos), VietaMove::from_slot(slot)));
            }
        }
        let acc = &mut sums[component_of[pos as usize] as usize];
        for i in 0..3 {
            acc[i] += y[i] as u64;
            if acc[i] >= n {
                acc[i] -= n;
            }
        }
    });

    for (component, acc) in components.iter_mut().zip(sums) {
        let component_sums = ComponentSums {
            size_mod_p: p.element(component.size),
            y_sums: acc.map(|s| p.element(s)),
        };
        report.components_checked += 1;
        if !component_sums.identity_holds() {
            report.component_failures += 1;
            report
                .first_component_failure
                .get_or_insert(component.representative);
        }
        component.penner_sums = Some(component_sums);
    }
    report
}

/// Component summaries of 𝒢_p, sorted by representative.
pub fn components(p: Prime) -> Result<Vec<ComponentSummary>, GraphError> {
    Ok(MarkoffGraph::build(p)?.components)
}

pub fn is_connected(p: Prime) -> Result<bool, GraphError> {
    let graph = MarkoffGraph::build_with(
        p,
        GraphOptions {
            penner_checks: false,
        },
    )?;
    Ok(graph.is_connected())
}

/// A sequence of Vieta moves.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct MovePath(pub Vec<VietaMove>);

impl MovePath {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn moves(&self) -> &[VietaMove] {
        &self.0
    }

    pub fn replay(&self, start: MarkoffTriple) -> MarkoffTriple {
        self.0.iter().fold(start, |x, &m| x.vieta(m))
    }

    pub fn replay_integers(&self, start: IntegerTriple) -> IntegerTriple {
        self.0.iter().fold(start, |x, &m| x.vieta(m))
    }
}

impl fmt::Display for MovePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, m) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{m}")?;
        }
        f.write_str("]")
    }
}

/// A nonnegative integer solution of `a1² + a2² + a3² = 3·a1·a2·a3`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntegerTriple {
    coords: [BigUint; 3],
}

impl IntegerTriple {
    /// `None` unless the coordinates solve the Markoff equation over ℤ.
    pub fn new(coords: [BigUint; 3]) -> Option<Self> {
        let t = IntegerTriple { coords };
        t.is_markoff().then_some(t)
    }

    pub fn fundamental() -> Self {
        IntegerTriple {
            coords: [BigUint::one(), BigUint::one(), BigUint::one()],
        }
    }

    pub fn coords(&self) -> &[BigUint; 3] {
        &self.coords
    }

    pub fn is_markoff(&self) -> bool {
        let [a, b, c] = &self.coords;
        a * a + b * b + c * c == BigUint::from(3u32) * a * b * c
    }

    /// Coordinate-wise reduction mod p.
    pub fn reduce(&self, p: Prime) -> [u64; 3] {
        let m = BigUint::from(p.get());
        self.coords.each_ref().map(|a| {
            let r = a % &m;
            r.iter_u64_digits().next().unwrap_or(0)
        })
    }

    /// Vieta move over ℤ.
    ///
    /// Both roots of `t² − 3·a_j·a_k·t + (a_j² + a_k²)` have nonnegative sum
    /// and product, so the image stays nonnegative.
    pub fn vieta(&self, m: VietaMove) -> IntegerTriple {
        let slot = m.slot();
        let [j, k] = other_slots(slot);
        let mut coords = self.coords.clone();
        coords[slot] = BigUint::from(3u32) * &self.coords[j] * &self.coords[k] - &self.coords[slot];
        IntegerTriple { coords }
    }
}

impl fmt::Display for IntegerTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = &self.coords;
        write!(f, "({a}, {b}, {c})")
    }
}

/// An integer triple together with the path that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lift {
    pub path: MovePath,
    pub triple: IntegerTriple,
}
