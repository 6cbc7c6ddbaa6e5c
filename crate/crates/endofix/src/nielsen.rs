//! Fixed point classes of a graph selfmap: locations, twists, Nielsen
//! partition, indices, stabilized ranks and the index-sum invariants.

use std::collections::BTreeSet;

use crate::error::Result;
use crate::graphmap::{edge_of, reverse_path, tighten, Dart, GraphSelfMap, Marking};
use crate::traintrack::DirectionMap;
use crate::words::{reduced_words_up_to, Endomorphism, Word};

pub const DEFAULT_RANK_CUTOFF: usize = 6;

pub fn default_path_cutoff(f: &GraphSelfMap) -> usize {
    2 * f.graph.n_edges()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UnitLocation {
    /// connected component of the pointwise-fixed subgraph
    Subgraph { vertices: Vec<usize>, edges: Vec<usize> },
    /// isolated fixed point in the interior of an edge; `position` is
    /// the 1-based index of the self-crossing in the edge image
    Interior { edge: usize, position: usize, preserving: bool },
}

/// Germ of a candidate attracting ray at a fixed point. A fixed
/// direction only contributes to the attracting count when its germ
/// images converge to a ray and the limit is not an endpoint of the
/// class group.
#[derive(Clone, Debug)]
pub enum RaySeed {
    /// outward fixed dart at a fixed vertex
    Vertex { dart: Dart },
    /// continuation past the interior point, after the occurrence
    InteriorForward { edge: usize, idx: usize },
    /// continuation behind the interior point, before the occurrence
    InteriorBackward { edge: usize, idx: usize },
}

/// One connected piece of the fixed point set.
#[derive(Clone, Debug)]
pub struct FixedUnit {
    pub location: UnitLocation,
    pub index: i64,
    /// fixed directions pointing out of the unit
    pub a: usize,
    /// twist of the unit's access path, as a word at the marking base
    pub twist: Word,
    /// one germ per fixed direction counted in `a`
    pub rays: Vec<RaySeed>,
}

impl FixedUnit {
    pub fn describe(&self) -> String {
        match &self.location {
            UnitLocation::Subgraph { vertices, edges } if edges.is_empty() => {
                format!("vertex {}", vertices[0])
            }
            UnitLocation::Subgraph { vertices, edges } => {
                format!("subgraph on vertices {vertices:?} with edges {edges:?}")
            }
            UnitLocation::Interior { edge, position, preserving } => format!(
                "interior of edge {edge} at crossing {position} ({})",
                if *preserving { "orientation-preserving" } else { "orientation-reversing" }
            ),
        }
    }
}

/// Fixed point units of `f`, with twists relative to the marking base
/// (which must be fixed).
///
/// An occurrence of `e` inside its own image at crossing `i` of `L`
/// pins an interior fixed point exactly when `2 <= i <= L - 1`; the
/// boundary crossings fix an endpoint instead. A reversed occurrence
/// pins one at any crossing.
pub fn fixed_units(f: &GraphSelfMap, m: &Marking) -> Result<Vec<FixedUnit>> {
    let g = &f.graph;
    let dm = DirectionMap::new(f);
    let fixed_v: BTreeSet<usize> = f.fixed_vertices().into_iter().collect();
    let fixed_e: BTreeSet<usize> = f.pointwise_fixed_edges().into_iter().collect();

    let mut units = Vec::new();

    // components of the fixed subgraph
    let mut seen: BTreeSet<usize> = BTreeSet::new();
    for &start in &fixed_v {
        if seen.contains(&start) {
            continue;
        }
        let mut vertices = vec![start];
        let mut edges = BTreeSet::new();
        seen.insert(start);
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for d in g.darts_at(v) {
                let e = edge_of(d);
                if fixed_e.contains(&e) {
                    edges.insert(e);
                    let w = g.terminus(d);
                    if seen.insert(w) {
                        vertices.push(w);
                        stack.push(w);
                    }
                }
            }
        }
        vertices.sort_unstable();
        let edges: Vec<usize> = edges.into_iter().collect();
        let chi = vertices.len() as i64 - edges.len() as i64;
        let mut a = 0usize;
        let mut rays = Vec::new();
        for &v in &vertices {
            for d in g.darts_at(v) {
                if !edges.contains(&edge_of(d)) && dm.image(d).ok() == Some(d) {
                    a += 1;
                    rays.push(RaySeed::Vertex { dart: d });
                }
            }
        }
        let rep = vertices[0];
        let eta = m.tree_path(rep);
        let t_path = tighten(
            &[f.map_path(&eta), reverse_path(&eta)].concat(),
        );
        units.push(FixedUnit {
            location: UnitLocation::Subgraph { vertices, edges },
            index: chi - a as i64,
            a,
            twist: m.path_word(&t_path),
            rays,
        });
    }

    // interior fixed points
    for e in 0..g.n_edges() {
        if fixed_e.contains(&e) {
            continue;
        }
        let p = f.edge_image(e);
        let l = p.len();
        let eta0 = m.tree_path(g.origin(2 * e));
        for (idx, &d) in p.iter().enumerate() {
            let i = idx + 1;
            if edge_of(d) != e {
                continue;
            }
            let preserving = d == 2 * e;
            if preserving && (i == 1 || i == l) {
                continue; // endpoint, owned by a vertex
            }
            let mut t_path = f.map_path(&eta0);
            t_path.extend_from_slice(&p[..idx]);
            if !preserving {
                t_path.push(2 * e + 1);
            }
            t_path.extend(reverse_path(&eta0));
            let t_path = tighten(&t_path);
            let rays = if preserving {
                vec![
                    RaySeed::InteriorForward { edge: e, idx },
                    RaySeed::InteriorBackward { edge: e, idx },
                ]
            } else {
                Vec::new()
            };
            units.push(FixedUnit {
                location: UnitLocation::Interior { edge: e, position: i, preserving },
                index: if preserving { -1 } else { 1 },
                a: if preserving { 2 } else { 0 },
                twist: m.path_word(&t_path),
                rays,
            });
        }
    }
    Ok(units)
}

const RAY_MAX_DARTS: usize = 48;
const RAY_ITERS: usize = 48;
const RAY_MIN_PREFIX: usize = 24;

/// Letter-operation budget of one class-group word search; the budget
/// is deterministic, and exhausting it leaves the rank uncertified.
const ORACLE_OPS_BUDGET: u64 = 60_000_000;

/// Stable dart prefix of the ray a germ develops into, or None when
/// the germ images keep changing near the fixed point (the direction
/// is fixed by the direction map but nothing is attracted along it).
fn develop_ray(f: &GraphSelfMap, seed: &RaySeed) -> Option<Vec<Dart>> {
    let step = |p: &[Dart]| -> Vec<Dart> {
        let raw = match seed {
            RaySeed::Vertex { .. } => f.map_path(p),
            RaySeed::InteriorForward { edge, idx } => {
                let img = f.edge_image(*edge);
                [img[idx + 1..].to_vec(), f.map_path(p)].concat()
            }
            RaySeed::InteriorBackward { edge, idx } => {
                let img = f.edge_image(*edge);
                [reverse_path(&img[..*idx]), f.map_path(p)].concat()
            }
        };
        let mut next = tighten(&raw);
        next.truncate(RAY_MAX_DARTS);
        next
    };
    let mut cur = match seed {
        RaySeed::Vertex { dart } => vec![*dart],
        _ => Vec::new(),
    };
    let mut stable = 0usize;
    for _ in 0..RAY_ITERS {
        let next = step(&cur);
        stable = cur.iter().zip(&next).take_while(|(x, y)| x == y).count();
        // the whole path recurs as a growing prefix of its own image:
        // iteration keeps extending it, so the limit ray exists
        if stable == cur.len() && next.len() > cur.len() && stable >= RAY_MIN_PREFIX {
            return Some(cur);
        }
        cur = next;
    }
    if stable >= RAY_MIN_PREFIX {
        cur.truncate(stable);
        Some(cur)
    } else {
        None
    }
}

/// Boundary word prefix of a developed ray, read from the marking base.
fn ray_word(f: &GraphSelfMap, m: &Marking, seed: &RaySeed, ray: &[Dart]) -> Word {
    let path = match seed {
        RaySeed::Vertex { dart } => {
            [m.tree_path(f.graph.origin(*dart)), ray.to_vec()].concat()
        }
        RaySeed::InteriorForward { edge, .. } => [
            m.tree_path(f.graph.origin(2 * edge)),
            vec![2 * edge],
            ray.to_vec(),
        ]
        .concat(),
        RaySeed::InteriorBackward { edge, .. } => {
            [m.tree_path(f.graph.origin(2 * edge)), ray.to_vec()].concat()
        }
    };
    m.path_word(&tighten(&path))
}

/// Whether the boundary prefixes `g * x` and `y` agree on a
/// substantial overlap.
fn translate_matches(g: &Word, x: &Word, y: &Word) -> bool {
    let gx = g.concat(x);
    let l = gx.len().min(y.len());
    l >= RAY_MIN_PREFIX / 2 && gx.letters()[..l] == y.letters()[..l]
}

/// Attracting count of one class: develop every fixed direction of
/// every unit, pull each limit into the coordinates of the class root
/// with the unit's conjugator, discard limits fixed by a nontrivial
/// element of the class group (endpoints of fixed words attract
/// nothing in the group direction), and count the remaining limits up
/// to the group action. Limits of distinct units can coincide once
/// translated, so identification runs over the whole class and also
/// allows the trivial translate.
fn class_attracting_count(
    f: &GraphSelfMap,
    m: &Marking,
    units: &[FixedUnit],
    group: &[usize],
    conj: &[Word],
    fixed_words: &[Word],
) -> usize {
    let one = Word::empty();
    let mut limits: Vec<Word> = Vec::new();
    for &i in group {
        let shift = conj[i].inverse();
        'rays: for seed in &units[i].rays {
            let Some(ray) = develop_ray(f, seed) else { continue };
            let xi = shift.concat(&ray_word(f, m, seed, &ray));
            for g in fixed_words {
                if !g.is_empty() && translate_matches(g, &xi, &xi) {
                    continue 'rays;
                }
            }
            limits.push(xi);
        }
    }
    let mut orbit_reps: Vec<Word> = Vec::new();
    'limits: for xi in limits {
        for rep in &orbit_reps {
            for g in fixed_words.iter().chain(std::iter::once(&one)) {
                if translate_matches(g, &xi, rep) {
                    continue 'limits;
                }
            }
        }
        orbit_reps.push(xi);
    }
    orbit_reps.len()
}

/// Whether twists `t1`, `t2` are related by `t2 = phi(w) t1 w^{-1}`
/// for some reduced `w` of length at most `l_path`.
pub fn twists_equivalent(
    phi: &Endomorphism,
    t1: &Word,
    t2: &Word,
    l_path: usize,
) -> Result<bool> {
    for w in reduced_words_up_to(phi.rank(), l_path) {
        let cand = phi.apply(&w)?.concat(t1).concat(&w.inverse());
        if &cand == t2 {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Abelianized obstruction: `t2 = phi(w) t1 w^{-1}` forces
/// `(A - I) x = d` over the integers, `A` the homology matrix and `d`
/// the exponent difference. Rational inconsistency certifies the
/// twists inequivalent at every cutoff.
pub fn twists_certified_distinct(phi: &Endomorphism, t1: &Word, t2: &Word) -> bool {
    let n = phi.rank();
    let a = phi.abelianization();
    let exp = |w: &Word| {
        let mut v = vec![0i128; n];
        for &l in w.letters() {
            let g = (l.unsigned_abs() - 1) as usize;
            v[g] += if l > 0 { 1 } else { -1 };
        }
        v
    };
    let (e1, e2) = (exp(t1), exp(t2));
    // augmented [(A - I) | d], fraction-free elimination
    let mut mat: Vec<Vec<i128>> = (0..n)
        .map(|i| {
            let mut row: Vec<i128> = (0..n)
                .map(|j| a[i][j] as i128 - if i == j { 1 } else { 0 })
                .collect();
            row.push(e2[i] - e1[i]);
            row
        })
        .collect();
    let mut rank_a = 0;
    let mut rank_aug = 0;
    let mut row = 0;
    for col in 0..n {
        if let Some(p) = (row..n).find(|&r| mat[r][col] != 0) {
            mat.swap(row, p);
            for r in 0..n {
                if r != row && mat[r][col] != 0 {
                    let (x, y) = (mat[row][col], mat[r][col]);
                    for c in 0..=n {
                        mat[r][c] = mat[r][c] * x - mat[row][c] * y;
                    }
                }
            }
            row += 1;
            rank_a += 1;
        }
    }
    rank_aug += rank_a;
    for r in row..n {
        if mat[r][n] != 0 {
            rank_aug += 1;
            break;
        }
    }
    rank_aug > rank_a
}

/// Nielsen partition of the units, as groups of unit indices together
/// with one conjugator per unit: `conj[i]` satisfies
/// `t_i = phi(conj[i]) t_root conj[i]^{-1}` against the twist of the
/// smallest unit in its group, so boundary data of unit `i` moves into
/// root coordinates by left multiplication with `conj[i]^{-1}`.
///
/// Orbit hashing: mapping every twist one conjugating word out and
/// bucketing the values finds exactly the pairs related by
/// `t_j = phi(w) t_i w^{-1}` with `|w| <= path_cutoff`.
pub fn partition_units(
    phi: &Endomorphism,
    units: &[FixedUnit],
    path_cutoff: usize,
) -> Result<(Vec<Vec<usize>>, Vec<Word>)> {
    let k = units.len();
    let mut parent: Vec<usize> = (0..k).collect();
    // rel[i]: t_i = phi(rel[i]) t_parent[i] rel[i]^{-1}
    let mut rel: Vec<Word> = vec![Word::empty(); k];
    fn find(p: &mut Vec<usize>, rel: &mut Vec<Word>, i: usize) -> usize {
        if p[i] == i {
            return i;
        }
        let up = p[i];
        let r = find(p, rel, up);
        if up != r {
            // relations compose through the old parent
            rel[i] = rel[i].concat(&rel[up]);
            p[i] = r;
        }
        r
    }
    let mut owner: std::collections::HashMap<Word, usize> = std::collections::HashMap::new();
    for (i, u) in units.iter().enumerate() {
        owner.entry(u.twist.clone()).or_insert(i);
    }
    let n = phi.rank();
    let exponents = |w: &Word| -> Vec<i64> {
        let mut v = vec![0i64; n];
        for &l in w.letters() {
            v[(l.unsigned_abs() - 1) as usize] += if l > 0 { 1 } else { -1 };
        }
        v
    };
    // the enumeration cost (2n)(2n-1)^(l-1) explodes with the cutoff,
    // so long cutoffs on large instances are trimmed to a fixed word
    // budget; the trim is deterministic
    const CONJUGATOR_BUDGET: u64 = 200_000;
    let mut cutoff = 0usize;
    let (mut total, mut layer) = (1u64, 1u64);
    while cutoff < path_cutoff {
        layer = layer
            .saturating_mul(if cutoff == 0 { 2 * n as u64 } else { (2 * n as u64).saturating_sub(1) });
        if total.saturating_add(layer) > CONJUGATOR_BUDGET && cutoff >= 2 {
            break;
        }
        total = total.saturating_add(layer);
        cutoff += 1;
    }
    // t_j = phi(w) t_i w^{-1} abelianizes to e_j = e_i + (A - I) e_w,
    // so a conjugator is only worth expanding when the shifted
    // exponent vector occurs among the twists; bucketing by the shift
    // makes the scan proportional to the matches
    let amat = phi.abelianization();
    let twist_exps: std::collections::HashSet<Vec<i64>> =
        units.iter().map(|u| exponents(&u.twist)).collect();
    let conjugators: Vec<Word> = reduced_words_up_to(phi.rank(), cutoff);
    let mut buckets: std::collections::HashMap<Vec<i64>, Vec<usize>> =
        std::collections::HashMap::new();
    for (ci, w) in conjugators.iter().enumerate() {
        let e = exponents(w);
        let delta: Vec<i64> = (0..n)
            .map(|i| (0..n).map(|j| amat[i][j] * e[j]).sum::<i64>() - e[i])
            .collect();
        buckets.entry(delta).or_default().push(ci);
    }
    let mut image_memo: Vec<Option<(Word, Word)>> = vec![None; conjugators.len()];
    let mut candidates: Vec<usize> = Vec::new();
    for i in 0..k {
        let ei = exponents(&units[i].twist);
        candidates.clear();
        for target in &twist_exps {
            let need: Vec<i64> = (0..n).map(|x| target[x] - ei[x]).collect();
            if let Some(cis) = buckets.get(&need) {
                candidates.extend_from_slice(cis);
            }
        }
        candidates.sort_unstable();
        let max_twist = units.iter().map(|u| u.twist.len()).max().unwrap_or(0);
        for &ci in &candidates {
            let w = &conjugators[ci];
            let (img, winv) = image_memo[ci].get_or_insert_with(|| {
                (phi.apply(w).expect("conjugator letters in range"), w.inverse())
            });
            // |val| >= |parts| - 2 * |rest|, so a value longer than
            // every twist cannot match and the concat is skipped
            let (li, lt, lw) = (img.len(), units[i].twist.len(), w.len());
            let lower = li.saturating_sub(lt + lw).max(lt.saturating_sub(li + lw));
            if lower > max_twist {
                continue;
            }
            let val = img.concat(&units[i].twist).concat(winv);
            if let Some(&j) = owner.get(&val) {
                // t_j = phi(w) t_i w^{-1}
                let (a, b) = (find(&mut parent, &mut rel, i), find(&mut parent, &mut rel, j));
                if a != b {
                    // t_b' = phi(rel_j^{-1} w rel_i) t_a' (..)^{-1}
                    // for roots a' = root(i), b' = root(j)
                    let root_rel = rel[j].inverse().concat(w).concat(&rel[i]);
                    if a < b {
                        parent[b] = a;
                        rel[b] = root_rel;
                    } else {
                        parent[a] = b;
                        rel[a] = root_rel.inverse();
                    }
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..k {
        let r = find(&mut parent, &mut rel, i);
        if let Some(g) = groups.iter_mut().find(|g| parent[g[0]] == r) {
            g.push(i);
        } else {
            groups.push(vec![i]);
        }
    }
    Ok((groups, rel))
}

#[derive(Clone, Debug)]
pub struct ClassRecord {
    pub location: String,
    pub index: i64,
    pub twist: Word,
    pub rank: usize,
    pub rank_certified: bool,
    pub rank_cutoff: usize,
    /// measured attracting count (fixed directions with genuine rays,
    /// up to the class group)
    pub a: usize,
    /// `1 - rank - index`, the theorem-side value of `a`; only
    /// meaningful when the rank is certified
    pub a_inversion: Option<i64>,
    /// `1 - rank`
    pub chr: i64,
    /// `1 - rank - a`
    pub ichr: i64,
}

impl ClassRecord {
    /// `2 * ind` of the class map, `rank - index - 1`; kept doubled to
    /// stay integral.
    pub fn index2_of_class_map(&self) -> i64 {
        self.rank as i64 - self.index - 1
    }
}

/// Restriction of the outer class to this fixed point class: the
/// endomorphism `g -> t^{-1} phi(g) t`, whose fixed subgroup is the
/// class group.
pub fn class_endomorphism(phi: &Endomorphism, twist: &Word) -> Endomorphism {
    phi.inner_twist(&twist.inverse())
}

#[derive(Clone, Debug)]
pub struct NielsenAnalysis {
    pub classes: Vec<ClassRecord>,
    pub lefschetz: i64,
    pub lefschetz_matches: bool,
    /// distinct classes all separated by the homology obstruction
    pub separation_certified: bool,
    pub jwz_sum: i64,
    pub two_chi: i64,
    /// doubled outer index sum and doubled bound `2(n - 1)`
    pub outer_index2: i64,
    pub bound2: i64,
    pub rank: usize,
    pub injective: bool,
    pub surjective: bool,
    pub rank_cutoff: usize,
    pub path_cutoff: usize,
}

/// Full fixed point class analysis of a selfmap with marked base.
pub fn analyze(
    f: &GraphSelfMap,
    m: &Marking,
    rank_cutoff: usize,
    path_cutoff: usize,
) -> Result<NielsenAnalysis> {
    let phi = crate::graphmap::induced_endomorphism(f, m)?;
    let units = fixed_units(f, m)?;
    let (groups, conj) = partition_units(&phi, &units, path_cutoff)?;

    let mut separation_certified = true;
    for gi in 0..groups.len() {
        for gj in gi + 1..groups.len() {
            let (u, v) = (&units[groups[gi][0]], &units[groups[gj][0]]);
            if !twists_certified_distinct(&phi, &u.twist, &v.twist) {
                separation_certified = false;
            }
        }
    }

    let mut classes = Vec::new();
    #[allow(clippy::type_complexity)]
    let mut rank_memo: std::collections::HashMap<Word, (usize, bool, Vec<Word>)> =
        std::collections::HashMap::new();
    let mut class_data = |twist: &Word| -> (usize, bool, Vec<Word>) {
        rank_memo
            .entry(twist.clone())
            .or_insert_with(|| {
                let psi = class_endomorphism(&phi, twist);
                // one enumeration serves both cutoffs; a truncated
                // search leaves the rank uncertified
                let (fixed, complete) =
                    crate::words::fixed_words_budgeted(&psi, rank_cutoff + 2, ORACLE_OPS_BUDGET);
                let lower: Vec<Word> = fixed
                    .iter()
                    .filter(|w| w.len() <= rank_cutoff)
                    .cloned()
                    .collect();
                let core_hi = crate::stallings::CoreGraph::fold(&fixed, phi.rank());
                let core_lo = crate::stallings::CoreGraph::fold(&lower, phi.rank());
                (core_lo.subgroup_rank(), complete && core_lo == core_hi, lower)
            })
            .clone()
    };
    for g in &groups {
        let rep = &units[g[0]];
        let (rank, rank_certified, fixed) = class_data(&rep.twist);
        let index: i64 = g.iter().map(|&i| units[i].index).sum();
        let a = class_attracting_count(f, m, &units, g, &conj, &fixed);
        let location = g
            .iter()
            .map(|&i| units[i].describe())
            .collect::<Vec<_>>()
            .join(" + ");
        classes.push(ClassRecord {
            location,
            index,
            twist: rep.twist.clone(),
            rank,
            rank_certified,
            rank_cutoff,
            a,
            a_inversion: rank_certified.then_some(1 - rank as i64 - index),
            chr: 1 - rank as i64,
            ichr: 1 - rank as i64 - a as i64,
        });
    }
    classes.sort_by(|x, y| x.twist.cmp(&y.twist));

    let n = m.rank();
    let lefschetz = 1 - phi.abelianization_trace();
    let index_total: i64 = classes.iter().map(|c| c.index).sum();
    let jwz_sum = classes
        .iter()
        .filter(|c| c.index + c.chr < 0)
        .map(|c| c.index + c.chr)
        .sum();
    let outer_index2 = classes
        .iter()
        .map(|c| c.index2_of_class_map().max(0))
        .sum();
    Ok(NielsenAnalysis {
        classes,
        lefschetz,
        lefschetz_matches: index_total == lefschetz,
        separation_certified,
        jwz_sum,
        two_chi: 2 * (1 - n as i64),
        outer_index2,
        bound2: 2 * (n as i64 - 1),
        rank: n,
        injective: crate::stallings::is_injective(&phi),
        surjective: crate::stallings::is_surjective(&phi),
        rank_cutoff,
        path_cutoff,
    })
}

/// Largest power up to `k_max` whose rose-side analysis stays
/// affordable. The fixed word search walks every reduced word in the
/// rank cutoff window carrying letter images along, so its cost is
/// roughly (number of words) * (longest image of the power); powers
/// past the budget are dropped rather than ground through.
pub fn affordable_power_cap(phi: &Endomorphism, k_max: usize, rank_cutoff: usize) -> usize {
    const COST_BUDGET: u64 = 25_000_000;
    let n = phi.rank() as u64;
    let mut words: u64 = 1;
    let mut layer: u64 = 1;
    for l in 0..rank_cutoff + 2 {
        layer = layer.saturating_mul(if l == 0 { 2 * n } else { (2 * n).saturating_sub(1) });
        words = words.saturating_add(layer);
    }
    let mut cap = 1;
    for k in 2..=k_max {
        let pk = phi.power(k);
        let longest = (1..=phi.rank()).map(|g| pk.image(g).len()).max().unwrap_or(1) as u64;
        if words.saturating_mul(longest.max(1)) > COST_BUDGET {
            break;
        }
        cap = k;
    }
    cap.min(k_max.max(1))
}

/// Analysis of the `k`-th power of an endomorphism via its rose
/// representative.
pub fn analyze_endomorphism_power(
    phi: &Endomorphism,
    k: usize,
    rank_cutoff: usize,
    path_cutoff: Option<usize>,
) -> Result<NielsenAnalysis> {
    let pk = phi.power(k);
    let (f, m) = crate::graphmap::rose_representative(&pk);
    let cutoff = path_cutoff.unwrap_or_else(|| default_path_cutoff(&f));
    analyze(&f, &m, rank_cutoff, cutoff)
}
