//! Transition matrices, Perron-Frobenius data, direction maps, gates,
//! illegal turns and the three-valued irreducibility certificate.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graphmap::{edge_of, inv, Dart, GraphSelfMap};

pub const PF_TOLERANCE: f64 = 1e-12;
pub const PF_MAX_ITER: usize = 100_000;

/// `M[i][j]` counts crossings of edge `i` (either direction) in the
/// image of edge `j`.
pub fn transition_matrix(f: &GraphSelfMap) -> Vec<Vec<u64>> {
    let m = f.graph.n_edges();
    let mut mat = vec![vec![0u64; m]; m];
    for j in 0..m {
        for &d in f.edge_image(j) {
            mat[edge_of(d)][j] += 1;
        }
    }
    mat
}

fn mat_mul(a: &[Vec<u64>], b: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let m = a.len();
    let mut c = vec![vec![0u64; m]; m];
    for i in 0..m {
        for k in 0..m {
            if a[i][k] == 0 {
                continue;
            }
            for j in 0..m {
                c[i][j] = c[i][j].saturating_add(a[i][k].saturating_mul(b[k][j]));
            }
        }
    }
    c
}

/// Strongly closed index set reachable-from check: returns a proper
/// nonempty closed subset when `mat` is reducible.
fn reducibility_witness(mat: &[Vec<u64>]) -> Option<Vec<usize>> {
    let m = mat.len();
    // closed under j -> i whenever M[i][j] > 0 (edges crossed by j)
    for seed in 0..m {
        let mut set = BTreeSet::from([seed]);
        let mut frontier = vec![seed];
        while let Some(j) = frontier.pop() {
            for i in 0..m {
                if mat[i][j] > 0 && set.insert(i) {
                    frontier.push(i);
                }
            }
        }
        if set.len() < m {
            return Some(set.into_iter().collect());
        }
    }
    None
}

#[derive(Clone, Debug)]
pub struct PfData {
    pub lambda: f64,
    pub eigenvector: Vec<f64>,
    pub iterations: usize,
    pub primitive: bool,
    /// least power with all entries positive, when primitive
    pub primitivity_witness: Option<usize>,
}

/// Characteristic polynomial coefficients by Faddeev-LeVerrier,
/// `p(x) = x^m + c[0] x^{m-1} + ... + c[m-1]`.
fn char_poly(mat: &[Vec<u64>]) -> Vec<f64> {
    let m = mat.len();
    let a: Vec<Vec<f64>> = mat
        .iter()
        .map(|r| r.iter().map(|&x| x as f64).collect())
        .collect();
    // M_1 = A, c_k = -tr(M_k)/k, M_{k+1} = A (M_k + c_k I)
    let mut mk = a.clone();
    let mut c = Vec::with_capacity(m);
    for k in 1..=m {
        let trace: f64 = (0..m).map(|i| mk[i][i]).sum();
        let ck = -trace / k as f64;
        c.push(ck);
        if k == m {
            break;
        }
        let mut shifted = mk.clone();
        for (i, row) in shifted.iter_mut().enumerate() {
            row[i] += ck;
        }
        let mut next = vec![vec![0.0; m]; m];
        for i in 0..m {
            for l in 0..m {
                if a[i][l] == 0.0 {
                    continue;
                }
                for j in 0..m {
                    next[i][j] += a[i][l] * shifted[l][j];
                }
            }
        }
        mk = next;
    }
    c
}

fn eval_char_poly(c: &[f64], x: f64) -> f64 {
    let mut v = 1.0;
    for &ci in c {
        v = v * x + ci;
    }
    v
}

/// Spectral radius and positive eigenvector of an irreducible
/// nonnegative integer matrix, by power iteration on `M + I` (which is
/// primitive when `M` is irreducible). Reducible input is an error
/// carrying a proper closed index subset.
pub fn pf_data(mat: &[Vec<u64>]) -> Result<PfData> {
    let m = mat.len();
    if m == 0 {
        return Err(Error::Invalid("empty transition matrix".into()));
    }
    if let Some(closed) = reducibility_witness(mat) {
        return Err(Error::ReducibleMatrix(closed));
    }
    let mut v = vec![1.0f64; m];
    let mut lambda_shifted = 0.0;
    let mut iterations = 0;
    for it in 1..=PF_MAX_ITER {
        iterations = it;
        let mut w = vec![0.0f64; m];
        for i in 0..m {
            let mut s = v[i]; // the +I part
            for j in 0..m {
                s += mat[i][j] as f64 * v[j];
            }
            w[i] = s;
        }
        let norm: f64 = w.iter().fold(0.0, |a, &x| a.max(x));
        for x in &mut w {
            *x /= norm;
        }
        let diff: f64 = w
            .iter()
            .zip(&v)
            .fold(0.0, |a, (&x, &y)| a.max((x - y).abs()));
        v = w;
        lambda_shifted = norm;
        if diff < PF_TOLERANCE {
            break;
        }
    }
    let lambda = lambda_shifted - 1.0;
    if m <= 4 {
        // cross-check against the characteristic polynomial
        let c = char_poly(mat);
        let p = eval_char_poly(&c, lambda);
        let scale = c.iter().fold(1.0f64, |a, &x| a.max(x.abs()));
        if p.abs() > 1e-6 * scale.max(lambda.powi(m as i32)) {
            return Err(Error::Invalid(format!(
                "eigenvalue {lambda} fails the characteristic polynomial check (p = {p})"
            )));
        }
    }
    // primitivity by boolean powers; witness bound (m-1)^2 + 1
    let bound = (m - 1) * (m - 1) + 1;
    let bool_cap = |x: &mut Vec<Vec<u64>>| {
        for row in x.iter_mut() {
            for e in row.iter_mut() {
                if *e > 0 {
                    *e = 1;
                }
            }
        }
    };
    let mut base: Vec<Vec<u64>> = mat.to_vec();
    bool_cap(&mut base);
    let mut pow = base.clone();
    let mut witness = None;
    for k in 1..=bound {
        if pow.iter().all(|r| r.iter().all(|&x| x > 0)) {
            witness = Some(k);
            break;
        }
        pow = mat_mul(&pow, &base);
        bool_cap(&mut pow);
    }
    Ok(PfData {
        lambda,
        eigenvector: v,
        iterations,
        primitive: witness.is_some(),
        primitivity_witness: witness,
    })
}

/// The derivative on darts: a dart maps to the first dart of its image
/// path. Collapsed edges have no direction image.
#[derive(Clone, Debug)]
pub struct DirectionMap {
    df: Vec<Option<Dart>>,
}

impl DirectionMap {
    pub fn new(f: &GraphSelfMap) -> DirectionMap {
        let df = (0..f.graph.n_darts())
            .map(|d| f.dart_image(d).first().copied())
            .collect();
        DirectionMap { df }
    }

    pub fn image(&self, d: Dart) -> Result<Dart> {
        self.df[d].ok_or(Error::CollapsedEdge(edge_of(d)))
    }

    /// Whether `Df^k(d1) = Df^k(d2)` for some `k <= n_darts`; such a
    /// turn is illegal. Returns the first such `k`.
    pub fn collision(&self, d1: Dart, d2: Dart) -> Result<Option<usize>> {
        let (mut a, mut b) = (d1, d2);
        for k in 0..=self.df.len() {
            if a == b {
                return Ok(Some(k));
            }
            a = self.image(a)?;
            b = self.image(b)?;
        }
        Ok(None)
    }

    /// Gates at `v`: collision classes of the darts based there.
    pub fn gates(&self, f: &GraphSelfMap, v: usize) -> Result<Vec<Vec<Dart>>> {
        let darts = f.graph.darts_at(v);
        let mut gates: Vec<Vec<Dart>> = Vec::new();
        for d in darts {
            let mut placed = false;
            for gate in &mut gates {
                if self.collision(gate[0], d)?.is_some() {
                    gate.push(d);
                    placed = true;
                    break;
                }
            }
            if !placed {
                gates.push(vec![d]);
            }
        }
        Ok(gates)
    }

    /// Darts at `v` with `Df(d) = d`.
    pub fn fixed_directions_at(&self, f: &GraphSelfMap, v: usize) -> Vec<Dart> {
        f.graph
            .darts_at(v)
            .into_iter()
            .filter(|&d| self.df[d] == Some(d))
            .collect()
    }
}

/// Turns `{inv(a), b}` taken between consecutive darts of edge images.
pub fn taken_turns(f: &GraphSelfMap) -> BTreeSet<(Dart, Dart)> {
    let mut turns = BTreeSet::new();
    for e in 0..f.graph.n_edges() {
        for w in f.edge_image(e).windows(2) {
            let (a, b) = (inv(w[0]), w[1]);
            turns.insert((a.min(b), a.max(b)));
        }
    }
    turns
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IllegalTurnWitness {
    pub edge: usize,
    /// position of the turn inside the edge image (between darts
    /// `position` and `position + 1`)
    pub position: usize,
    pub darts: (Dart, Dart),
    /// iterate of the direction map at which the two sides collide
    pub collide_at: usize,
}

/// A map with tight edge images is a train track map exactly when no
/// taken turn is illegal: images then stay tight under iteration.
pub fn train_track_obstruction(f: &GraphSelfMap) -> Result<Option<IllegalTurnWitness>> {
    for e in 0..f.graph.n_edges() {
        if f.is_collapsed(e) {
            return Err(Error::CollapsedEdge(e));
        }
    }
    let dm = DirectionMap::new(f);
    for e in 0..f.graph.n_edges() {
        let img = f.edge_image(e);
        for (pos, w) in img.windows(2).enumerate() {
            let (a, b) = (inv(w[0]), w[1]);
            if let Some(k) = dm.collision(a, b)? {
                return Ok(Some(IllegalTurnWitness {
                    edge: e,
                    position: pos,
                    darts: (a.min(b), a.max(b)),
                    collide_at: k,
                }));
            }
        }
    }
    Ok(None)
}

pub fn is_train_track(f: &GraphSelfMap) -> Result<bool> {
    Ok(train_track_obstruction(f)?.is_none())
}

/// Whitehead graph at `v`: vertices are the gates, with an edge for
/// every turn taken by some iterated edge image (taken turns closed
/// under the direction map).
pub fn whitehead_graph_components(f: &GraphSelfMap, v: usize) -> Result<usize> {
    let dm = DirectionMap::new(f);
    let gates = dm.gates(f, v)?;
    if gates.is_empty() {
        return Ok(0);
    }
    let mut turns = taken_turns(f);
    loop {
        let next: BTreeSet<(Dart, Dart)> = turns
            .iter()
            .map(|&(a, b)| {
                let (x, y) = (dm.image(a)?, dm.image(b)?);
                Ok((x.min(y), x.max(y)))
            })
            .collect::<Result<_>>()?;
        let before = turns.len();
        turns.extend(next);
        if turns.len() == before {
            break;
        }
    }
    let gate_of = |d: Dart| gates.iter().position(|g| g.contains(&d));
    let mut parent: Vec<usize> = (0..gates.len()).collect();
    fn find(p: &mut Vec<usize>, mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for &(a, b) in &turns {
        if let (Some(ga), Some(gb)) = (gate_of(a), gate_of(b)) {
            let (ra, rb) = (find(&mut parent, ga), find(&mut parent, gb));
            if ra != rb {
                parent[ra] = rb;
            }
        }
    }
    let roots: BTreeSet<usize> = (0..gates.len())
        .map(|i| find(&mut parent, i))
        .collect();
    Ok(roots.len())
}

/// An `f`-invariant proper edge subset (closure of a single edge under
/// image crossings) whose spanned subgraph has Betti number in
/// `1..=ambient_betti - 1`; witnesses failure of irreducibility.
pub fn invariant_subgraph_witness(f: &GraphSelfMap) -> Option<(Vec<usize>, usize)> {
    let m = f.graph.n_edges();
    let ambient = f.graph.betti();
    for seed in 0..m {
        let mut set = BTreeSet::from([seed]);
        let mut frontier = vec![seed];
        while let Some(e) = frontier.pop() {
            for &d in f.edge_image(e) {
                if set.insert(edge_of(d)) {
                    frontier.push(edge_of(d));
                }
            }
        }
        if set.len() == m {
            continue;
        }
        let vertices: BTreeSet<usize> = set
            .iter()
            .flat_map(|&e| {
                let (o, t) = f.graph.endpoints(e);
                [o, t]
            })
            .collect();
        // components of the spanned subgraph
        let vlist: Vec<usize> = vertices.iter().copied().collect();
        let mut parent: Vec<usize> = (0..vlist.len()).collect();
        fn find(p: &mut Vec<usize>, mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        let idx = |v: usize| vlist.binary_search(&v).unwrap();
        for &e in &set {
            let (o, t) = f.graph.endpoints(e);
            let (a, b) = (find(&mut parent, idx(o)), find(&mut parent, idx(t)));
            if a != b {
                parent[a] = b;
            }
        }
        let comps: BTreeSet<usize> = (0..vlist.len())
            .map(|i| find(&mut parent, i))
            .collect();
        let betti = set.len() + comps.len() - vlist.len();
        if betti >= 1 && betti + 1 <= ambient {
            return Some((set.into_iter().collect(), betti));
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq)]
pub enum IwipCertificate {
    Certified {
        lambda: f64,
        primitivity_witness: usize,
    },
    Refuted {
        invariant_edges: Vec<usize>,
        betti: usize,
    },
    Inconclusive {
        reason: String,
    },
}

/// Three-valued certificate. Certified needs a train track structure,
/// a primitive transition matrix and connected Whitehead graphs;
/// refuted needs an invariant proper subgraph of intermediate Betti
/// number; anything else is inconclusive.
pub fn iwip_certificate(f: &GraphSelfMap) -> Result<IwipCertificate> {
    if let Some((invariant_edges, betti)) = invariant_subgraph_witness(f) {
        return Ok(IwipCertificate::Refuted { invariant_edges, betti });
    }
    match train_track_obstruction(f)? {
        Some(w) => {
            return Ok(IwipCertificate::Inconclusive {
                reason: format!(
                    "not a train track map: illegal turn {:?} in the image of edge {} \
                     (direction collision at iterate {})",
                    w.darts, w.edge, w.collide_at
                ),
            })
        }
        None => {}
    }
    let mat = transition_matrix(f);
    let pf = match pf_data(&mat) {
        Ok(pf) => pf,
        Err(Error::ReducibleMatrix(sub)) => {
            return Ok(IwipCertificate::Inconclusive {
                reason: format!("transition matrix reducible on edge subset {sub:?}"),
            })
        }
        Err(e) => return Err(e),
    };
    let Some(witness) = pf.primitivity_witness else {
        return Ok(IwipCertificate::Inconclusive {
            reason: "transition matrix irreducible but not primitive".into(),
        });
    };
    for v in 0..f.graph.n_vertices() {
        if whitehead_graph_components(f, v)? > 1 {
            return Ok(IwipCertificate::Inconclusive {
                reason: format!("Whitehead graph at vertex {v} is disconnected"),
            });
        }
    }
    Ok(IwipCertificate::Certified {
        lambda: pf.lambda,
        primitivity_witness: witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphmap::{rose_representative, subdivide, GraphSelfMap, OrientedGraph};
    use crate::words::Endomorphism;

    fn referee_rose() -> GraphSelfMap {
        let phi = Endomorphism::parse_text("rank: 2\na -> ab\nb -> aBa\n").unwrap();
        rose_representative(&phi).0
    }

    fn theta_h() -> GraphSelfMap {
        let g = OrientedGraph::new(2, &[(0, 1), (0, 1), (0, 1)]);
        GraphSelfMap::new(g, vec![0, 0], vec![vec![4, 3], vec![2, 1], vec![0, 5]]).unwrap()
    }

    fn jiang_subdivided() -> GraphSelfMap {
        let phi = Endomorphism::parse_text("rank: 2\na -> a\nb -> Bab\n").unwrap();
        let (f, _) = rose_representative(&phi);
        subdivide(&f, 1, &[3, 4]).unwrap()
    }

    #[test]
    fn referee_transition_matrix() {
        assert_eq!(transition_matrix(&referee_rose()), vec![vec![1, 2], vec![1, 1]]);
    }

    #[test]
    fn theta_transition_matrix() {
        assert_eq!(
            transition_matrix(&theta_h()),
            vec![vec![0, 1, 1], vec![1, 1, 0], vec![1, 0, 1]]
        );
    }

    #[test]
    fn pf_referee_is_one_plus_sqrt2() {
        let pf = pf_data(&[vec![1, 2], vec![1, 1]]).unwrap();
        assert!((pf.lambda - (1.0 + 2f64.sqrt())).abs() < 1e-9);
        assert!(pf.primitive);
        assert_eq!(pf.primitivity_witness, Some(1));
    }

    #[test]
    fn pf_scalar_and_rotation() {
        let pf = pf_data(&[vec![2]]).unwrap();
        assert!((pf.lambda - 2.0).abs() < 1e-9);
        assert!(pf.primitive);
        assert_eq!(pf.primitivity_witness, Some(1));

        // irreducible but not primitive; spectral radius 1
        let rot = pf_data(&[vec![0, 1], vec![1, 0]]).unwrap();
        assert!((rot.lambda - 1.0).abs() < 1e-9);
        assert!(!rot.primitive);
    }

    #[test]
    fn pf_rejects_reducible() {
        match pf_data(&[vec![1, 0], vec![1, 1]]) {
            Err(Error::ReducibleMatrix(sub)) => assert_eq!(sub, vec![1]),
            other => panic!("expected reducibility error, got {other:?}"),
        }
    }

    #[test]
    fn pf_theta_is_two() {
        let pf = pf_data(&transition_matrix(&theta_h())).unwrap();
        assert!((pf.lambda - 2.0).abs() < 1e-9);
        assert_eq!(pf.primitivity_witness, Some(2));
    }

    #[test]
    fn referee_rose_is_not_train_track() {
        let w = train_track_obstruction(&referee_rose()).unwrap().unwrap();
        // the turn {b, a-bar...}: darts 2 and 0 collide immediately
        assert_eq!(w.darts, (0, 2));
        assert_eq!(w.edge, 1);
        assert_eq!(w.collide_at, 1);
    }

    #[test]
    fn theta_and_jiang_subdivided_are_train_tracks() {
        assert!(is_train_track(&theta_h()).unwrap());
        assert!(is_train_track(&jiang_subdivided()).unwrap());
    }

    #[test]
    fn theta_gates_and_whitehead() {
        let h = theta_h();
        let dm = DirectionMap::new(&h);
        assert_eq!(dm.gates(&h, 0).unwrap().len(), 3);
        assert_eq!(dm.gates(&h, 1).unwrap().len(), 3);
        assert_eq!(whitehead_graph_components(&h, 0).unwrap(), 1);
        assert_eq!(whitehead_graph_components(&h, 1).unwrap(), 1);
    }

    #[test]
    fn theta_fixed_directions() {
        let h = theta_h();
        let dm = DirectionMap::new(&h);
        assert_eq!(dm.fixed_directions_at(&h, 0), vec![2]);
        let h2 = h.iterate(2);
        let dm2 = DirectionMap::new(&h2);
        assert_eq!(dm2.fixed_directions_at(&h2, 0).len(), 3);
    }

    #[test]
    fn theta_certificate_certified() {
        match iwip_certificate(&theta_h()).unwrap() {
            IwipCertificate::Certified { lambda, primitivity_witness } => {
                assert!((lambda - 2.0).abs() < 1e-9);
                assert_eq!(primitivity_witness, 2);
            }
            other => panic!("expected certified, got {other:?}"),
        }
    }

    #[test]
    fn jiang_subdivided_certificate_refuted() {
        match iwip_certificate(&jiang_subdivided()).unwrap() {
            IwipCertificate::Refuted { invariant_edges, betti } => {
                assert_eq!(invariant_edges, vec![0]); // the fixed loop
                assert_eq!(betti, 1);
            }
            other => panic!("expected refuted, got {other:?}"),
        }
    }

    #[test]
    fn referee_rose_certificate_inconclusive() {
        match iwip_certificate(&referee_rose()).unwrap() {
            IwipCertificate::Inconclusive { reason } => {
                assert!(reason.contains("illegal turn"));
            }
            other => panic!("expected inconclusive, got {other:?}"),
        }
    }

    #[test]
    fn transition_matrix_multiplicative_on_train_tracks() {
        // no cancellation under iteration, so M(h^r) = M(h)^r
        let h = theta_h();
        let m1 = transition_matrix(&h);
        for r in 2..=4 {
            let mr = transition_matrix(&h.iterate(r));
            let mut acc = m1.clone();
            for _ in 1..r {
                acc = mat_mul(&acc, &m1);
            }
            assert_eq!(mr, acc);
        }
    }

    #[test]
    fn lambda_grows_multiplicatively() {
        let h = theta_h();
        let l1 = pf_data(&transition_matrix(&h)).unwrap().lambda;
        let l2 = pf_data(&transition_matrix(&h.iterate(2))).unwrap().lambda;
        assert!((l2 - l1 * l1).abs() < 1e-6);
    }

    #[test]
    fn char_poly_values() {
        // [[1,2],[1,1]]: p(x) = x^2 - 2x - 1
        let c = char_poly(&[vec![1, 2], vec![1, 1]]);
        assert!((c[0] + 2.0).abs() < 1e-9);
        assert!((c[1] + 1.0).abs() < 1e-9);
    }
}
