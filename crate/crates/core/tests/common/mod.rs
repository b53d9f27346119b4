//! Seeded corpus of small configurations with resolutions and, mostly, pencils.
//!
//! Every branch is smooth. A branch at a point is described by a path of directions
//! through the infinitely near points, and two branches at the same point meet with
//! multiplicity one plus the length of their common prefix. Templates:
//!
//! * A: concurrent lines grouped into fibers with multiplicities.
//! * B: conics bitangent at two points, the two tangent lines, the doubled chord.
//! * C: conics through four points and the three line pairs through them.
//! * D: conics with contact of order 4 at one point and the doubled tangent.
//! * E: conics tangent at one point and through two more, with two line pairs.
//! * L: random line arrangements without a pencil.
#![allow(dead_code)]

use std::collections::BTreeMap;

use acc_core::acc::{
    compute_degrees, validate_acc, Acc, BranchId, ComponentId, DegreeData, PointId, RawAcc,
};
use acc_core::admissibility::VectorFamily;
use acc_core::blowup::{
    apply_sigma_process, validate_resolution_script, ResolutionTrace, SigmaProcessSpec,
};
use acc_core::rational::{rat, Rational};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CORPUS_SEED: u64 = 0x5eed_acc0;
pub const CORPUS_SIZE: usize = 240;
pub const LINE_ARRANGEMENTS: usize = 40;

pub struct Instance {
    pub name: String,
    pub acc: Acc,
    pub degrees: DegreeData,
    pub trace: ResolutionTrace,
    /// Fibers and multiplicities, for templates that carry a pencil.
    pub pencil: Option<(Vec<Vec<ComponentId>>, Vec<u64>)>,
}

type Builder = fn(&mut ChaCha8Rng) -> Sketch;

struct Sketch {
    degrees: Vec<u64>,
    /// Branches at each point: owner and direction path.
    points: Vec<Vec<(usize, Vec<u8>)>>,
    fibers: Vec<Vec<usize>>,
    mult: Vec<u64>,
}

impl Sketch {
    fn new(degrees: Vec<u64>) -> Self {
        Sketch {
            degrees,
            points: Vec::new(),
            fibers: Vec::new(),
            mult: Vec::new(),
        }
    }

    fn point(&mut self, branches: Vec<(usize, Vec<u8>)>) {
        if branches.len() >= 2 {
            self.points.push(branches);
        }
    }
}

fn contact(a: &[u8], b: &[u8]) -> u64 {
    1 + a.iter().zip(b).take_while(|(x, y)| x == y).count() as u64
}

/// Random composition of `n` into `parts` positive integers.
fn composition(rng: &mut ChaCha8Rng, n: u64, parts: usize) -> Vec<u64> {
    let mut out = vec![1; parts];
    for _ in 0..(n - parts as u64) {
        let i = rng.gen_range(0..parts);
        out[i] += 1;
    }
    out
}

fn concurrent_lines(rng: &mut ChaCha8Rng) -> Sketch {
    let r = rng.gen_range(3..=6);
    let k = rng.gen_range(3..=r);
    let mut fiber_of: Vec<usize> = (0..r)
        .map(|i| if i < k { i } else { rng.gen_range(0..k) })
        .collect();
    fiber_of.shuffle(rng);
    let mut s = Sketch::new(vec![1; r]);
    s.fibers = (0..k)
        .map(|j| (0..r).filter(|&i| fiber_of[i] == j).collect())
        .collect();
    let largest = s.fibers.iter().map(Vec::len).max().unwrap() as u64;
    let n = largest + rng.gen_range(0..=1);
    s.mult = vec![0; r];
    for fiber in &s.fibers {
        for (&c, m) in fiber.iter().zip(composition(rng, n, fiber.len())) {
            s.mult[c] = m;
        }
    }
    s.point((0..r).map(|i| (i, vec![i as u8])).collect());
    s
}

fn bitangent_conics(rng: &mut ChaCha8Rng) -> Sketch {
    let (r, tangents, chord) = loop {
        let r = rng.gen_range(0..=4);
        let tangents = rng.gen_bool(0.5);
        let chord = rng.gen_bool(0.5);
        let fibers = r + tangents as usize + chord as usize;
        let components = r + 2 * tangents as usize + chord as usize;
        if fibers >= 3 && components <= 6 {
            break (r, tangents, chord);
        }
    };
    let mut degrees = vec![2; r];
    let t = tangents.then(|| {
        degrees.extend([1, 1]);
        (r, r + 1)
    });
    let l = chord.then(|| {
        degrees.push(1);
        degrees.len() - 1
    });
    let mut s = Sketch::new(degrees);
    for side in 0..2 {
        let mut at: Vec<(usize, Vec<u8>)> = (0..r).map(|i| (i, vec![0, i as u8])).collect();
        if let Some((t1, t2)) = t {
            at.push((if side == 0 { t1 } else { t2 }, vec![0, 200]));
        }
        if let Some(l) = l {
            at.push((l, vec![1]));
        }
        s.point(at);
    }
    s.mult = vec![1; s.degrees.len()];
    s.fibers = (0..r).map(|i| vec![i]).collect();
    if let Some((t1, t2)) = t {
        s.point(vec![(t1, vec![0]), (t2, vec![1])]);
        s.fibers.push(vec![t1, t2]);
    }
    if let Some(l) = l {
        s.fibers.push(vec![l]);
        s.mult[l] = 2;
    }
    s
}

fn four_point_conics(rng: &mut ChaCha8Rng) -> Sketch {
    const PAIRS: [[(usize, usize); 2]; 3] = [[(1, 2), (3, 4)], [(1, 3), (2, 4)], [(1, 4), (2, 3)]];
    let (r, pairs) = loop {
        let r = rng.gen_range(0..=3);
        let pairs: Vec<usize> = (0..3).filter(|_| rng.gen_bool(0.6)).collect();
        if r + pairs.len() >= 3 && r + 2 * pairs.len() <= 6 {
            break (r, pairs);
        }
    };
    let mut degrees = vec![2; r];
    let mut lines = Vec::new();
    for &p in &pairs {
        for &(a, b) in &PAIRS[p] {
            lines.push((degrees.len(), a, b));
            degrees.push(1);
        }
    }
    let mut s = Sketch::new(degrees);
    for base in 1..=4 {
        let mut at: Vec<(usize, Vec<u8>)> = (0..r).map(|i| (i, vec![i as u8])).collect();
        for &(c, a, b) in &lines {
            if a == base || b == base {
                at.push((c, vec![10 + c as u8]));
            }
        }
        s.point(at);
    }
    s.fibers = (0..r).map(|i| vec![i]).collect();
    for pair in lines.chunks(2) {
        s.point(vec![(pair[0].0, vec![0]), (pair[1].0, vec![1])]);
        s.fibers.push(vec![pair[0].0, pair[1].0]);
    }
    s.mult = vec![1; s.degrees.len()];
    s
}

fn osculating_conics(rng: &mut ChaCha8Rng) -> Sketch {
    let (r, tangent) = loop {
        let r = rng.gen_range(2..=5);
        let tangent = rng.gen_bool(0.5);
        if r + tangent as usize >= 3 && r + tangent as usize <= 6 {
            break (r, tangent);
        }
    };
    let mut degrees = vec![2; r];
    let mut at: Vec<(usize, Vec<u8>)> = (0..r).map(|i| (i, vec![0, 0, 0, i as u8])).collect();
    let mut mult = vec![1; r];
    let mut fibers: Vec<Vec<usize>> = (0..r).map(|i| vec![i]).collect();
    if tangent {
        at.push((r, vec![0, 1]));
        degrees.push(1);
        mult.push(2);
        fibers.push(vec![r]);
    }
    let mut s = Sketch::new(degrees);
    s.point(at);
    s.fibers = fibers;
    s.mult = mult;
    s
}

fn tangent_conics(rng: &mut ChaCha8Rng) -> Sketch {
    let (r, tt, pp) = loop {
        let r = rng.gen_range(1..=4);
        let tt = rng.gen_bool(0.6);
        let pp = rng.gen_bool(0.6);
        if r + tt as usize + pp as usize >= 3 && r + 2 * (tt as usize + pp as usize) <= 6 {
            break (r, tt, pp);
        }
    };
    let mut degrees = vec![2; r];
    let mut fibers: Vec<Vec<usize>> = (0..r).map(|i| vec![i]).collect();
    let t = tt.then(|| {
        degrees.extend([1, 1]);
        fibers.push(vec![r, r + 1]);
        (r, r + 1)
    });
    let lp = pp.then(|| {
        let first = degrees.len();
        degrees.extend([1, 1]);
        fibers.push(vec![first, first + 1]);
        (first, first + 1)
    });
    let conics = |path: fn(usize) -> Vec<u8>| -> Vec<(usize, Vec<u8>)> {
        (0..r).map(|i| (i, path(i))).collect()
    };
    let mut s = Sketch::new(degrees);
    let mut at_p = conics(|i| vec![0, i as u8]);
    let mut at_a = conics(|i| vec![i as u8]);
    let mut at_b = conics(|i| vec![i as u8]);
    if let Some((tangent, ab)) = t {
        at_p.push((tangent, vec![0, 200]));
        at_a.push((ab, vec![100]));
        at_b.push((ab, vec![100]));
        s.point(vec![(tangent, vec![0]), (ab, vec![1])]);
    }
    if let Some((pa, pb)) = lp {
        at_p.push((pa, vec![1]));
        at_p.push((pb, vec![2]));
        at_a.push((pa, vec![101]));
        at_b.push((pb, vec![101]));
    }
    s.point(at_p);
    s.point(at_a);
    s.point(at_b);
    s.mult = vec![1; s.degrees.len()];
    s.fibers = fibers;
    s
}

fn line_arrangement(rng: &mut ChaCha8Rng) -> Sketch {
    loop {
        let r = rng.gen_range(3..=6);
        let mut covered = vec![vec![false; r]; r];
        let mut pairs: Vec<(usize, usize)> = (0..r)
            .flat_map(|a| (a + 1..r).map(move |b| (a, b)))
            .collect();
        pairs.shuffle(rng);
        let mut points: Vec<Vec<usize>> = Vec::new();
        for (a, b) in pairs {
            if covered[a][b] {
                continue;
            }
            let mut members = vec![a, b];
            let mut others: Vec<usize> = (0..r).filter(|&c| c != a && c != b).collect();
            others.shuffle(rng);
            for c in others {
                if members.iter().all(|&m| !covered[m][c]) && rng.gen_bool(0.7) {
                    members.push(c);
                }
            }
            for &x in &members {
                for &y in &members {
                    covered[x][y] = true;
                }
            }
            points.push(members);
        }
        if points.len() <= 8 {
            let mut s = Sketch::new(vec![1; r]);
            for members in points {
                s.point(
                    members
                        .iter()
                        .enumerate()
                        .map(|(i, &c)| (c, vec![i as u8]))
                        .collect(),
                );
            }
            return s;
        }
    }
}

/// Shuffles ids and builds the ACC. Returns the ACC and the component permutation.
fn realize(rng: &mut ChaCha8Rng, sketch: &Sketch) -> (Acc, Vec<usize>) {
    let n = sketch.degrees.len();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut point_order: Vec<usize> = (0..sketch.points.len()).collect();
    point_order.shuffle(rng);
    let mut branches: Vec<(usize, usize, &[u8])> = Vec::new();
    for (new_p, &old_p) in point_order.iter().enumerate() {
        for (c, path) in &sketch.points[old_p] {
            branches.push((new_p, perm[*c], path));
        }
    }
    branches.shuffle(rng);
    let mut mu = Vec::new();
    for (a, x) in branches.iter().enumerate() {
        for (b, y) in branches.iter().enumerate().skip(a + 1) {
            if x.0 == y.0 && x.1 != y.1 {
                mu.push((a, b, contact(x.2, y.2)));
            }
        }
    }
    let raw = RawAcc {
        components: n,
        points: sketch.points.len(),
        attach: branches.iter().map(|b| b.0).collect(),
        owner: branches.iter().map(|b| b.1).collect(),
        mu,
    };
    (validate_acc(&raw).expect("sketches give valid ACCs"), perm)
}

fn is_nc_point(acc: &Acc, p: PointId) -> bool {
    let at = acc.branches_at(p);
    at.len() <= 2
        && at
            .iter()
            .all(|&a| at.iter().all(|&b| a == b || acc.mu(a, b) <= 1))
}

/// Blow-up of `p` with unit ν: branches meeting with multiplicity above 1 stay together.
pub fn forced_spec(rng: &mut ChaCha8Rng, acc: &Acc, p: PointId) -> SigmaProcessSpec {
    let at = acc.branches_at(p);
    let mut cluster_of: Vec<usize> = (0..at.len()).collect();
    for i in 0..at.len() {
        for j in 0..i {
            if acc.mu(at[i], at[j]) > 1 {
                let (from, to) = (cluster_of[i], cluster_of[j]);
                for c in cluster_of.iter_mut() {
                    if *c == from {
                        *c = to;
                    }
                }
            }
        }
    }
    let mut clusters: BTreeMap<usize, Vec<BranchId>> = BTreeMap::new();
    for (i, &b) in at.iter().enumerate() {
        clusters.entry(cluster_of[i]).or_default().push(b);
    }
    let mut clusters: Vec<Vec<BranchId>> = clusters.into_values().collect();
    clusters.shuffle(rng);
    SigmaProcessSpec::with_unit_nu(p, clusters)
}

/// Blows up non-normal-crossing points in random order, now and then also a
/// normal-crossing one.
pub fn random_script(rng: &mut ChaCha8Rng, acc: &Acc) -> Vec<SigmaProcessSpec> {
    let mut stage = acc.clone();
    let mut script = Vec::new();
    let mut extra = 0;
    loop {
        let bad: Vec<PointId> = stage
            .points()
            .iter()
            .copied()
            .filter(|&p| !is_nc_point(&stage, p))
            .collect();
        let p = if extra < 2 && rng.gen_bool(0.15) {
            extra += 1;
            *stage.points().choose(rng).expect("points exist")
        } else if let Some(&p) = bad.choose(rng) {
            p
        } else {
            break;
        };
        let spec = forced_spec(rng, &stage, p);
        stage = apply_sigma_process(&stage, &spec)
            .expect("forced specs are valid")
            .0;
        script.push(spec);
        assert!(script.len() < 64, "resolution does not terminate");
    }
    script
}

fn instance(rng: &mut ChaCha8Rng, name: String, sketch: Sketch) -> Instance {
    let (acc, perm) = realize(rng, &sketch);
    let degrees = compute_degrees(&acc).expect("sketches satisfy Bezout");
    for (old, &new) in perm.iter().enumerate() {
        assert_eq!(
            *degrees.degree(ComponentId(new)),
            rat(sketch.degrees[old] as i64),
            "{name}"
        );
    }
    let script = random_script(rng, &acc);
    let trace = validate_resolution_script(&acc, &script).expect("random scripts resolve");
    let pencil = (!sketch.fibers.is_empty()).then(|| {
        let fibers = sketch
            .fibers
            .iter()
            .map(|f| f.iter().map(|&c| ComponentId(perm[c])).collect())
            .collect();
        let mut mult = vec![0; perm.len()];
        for (old, &new) in perm.iter().enumerate() {
            mult[new] = sketch.mult[old];
        }
        (fibers, mult)
    });
    Instance {
        name,
        acc,
        degrees,
        trace,
        pencil,
    }
}

/// `CORPUS_SIZE` pencil instances (templates A to E in turn) followed by
/// `LINE_ARRANGEMENTS` line arrangements.
pub fn corpus() -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED);
    let templates: [(&str, Builder); 5] = [
        ("A", concurrent_lines),
        ("B", bitangent_conics),
        ("C", four_point_conics),
        ("D", osculating_conics),
        ("E", tangent_conics),
    ];
    let mut out = Vec::with_capacity(CORPUS_SIZE + LINE_ARRANGEMENTS);
    for i in 0..CORPUS_SIZE {
        let (tag, build) = templates[i % templates.len()];
        let sketch = build(&mut rng);
        out.push(instance(&mut rng, format!("{tag}{i}"), sketch));
    }
    for i in 0..LINE_ARRANGEMENTS {
        let sketch = line_arrangement(&mut rng);
        out.push(instance(&mut rng, format!("L{i}"), sketch));
    }
    out
}

/// A copy of `fam` with one vector replaced by a random small integer vector.
pub fn perturbed_family(rng: &mut ChaCha8Rng, fam: &VectorFamily) -> VectorFamily {
    let c = ComponentId(rng.gen_range(0..fam.len()));
    let v: Vec<Rational> = (0..fam.dim()).map(|_| rat(rng.gen_range(-2..=2))).collect();
    fam.clone().with_vector(c, v).expect("same dimension")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One instance of template `index % 6` (the sixth being a line arrangement).
pub fn random_instance(seed: u64, index: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let builders: [(&str, Builder); 6] = [
        ("A", concurrent_lines),
        ("B", bitangent_conics),
        ("C", four_point_conics),
        ("D", osculating_conics),
        ("E", tangent_conics),
        ("L", line_arrangement),
    ];
    let (tag, build) = builders[index % builders.len()];
    let sketch = build(&mut rng);
    instance(&mut rng, format!("{tag}-{seed}"), sketch)
}

pub struct GoldenCase {
    pub name: &'static str,
    pub args: Vec<&'static str>,
    pub code: i32,
}

/// Every subcommand on every fixture. Paths are relative to the crate root, which is
/// the working directory of integration tests.
pub fn golden_cases() -> Vec<GoldenCase> {
    let case = |name, args: &'static str, code| GoldenCase {
        name,
        args: std::iter::once("acc")
            .chain(args.split_whitespace())
            .collect(),
        code,
    };
    vec![
        case("validate_conic.txt", "validate fixtures/conic.acc", 0),
        case("validate_sixlines.txt", "validate fixtures/sixlines.acc", 0),
        case("validate_bitangent.txt", "validate fixtures/bitangent.acc", 0),
        case("validate_badtriple.txt", "validate fixtures/badtriple.acc", 0),
        case("validate_conic.json", "--json validate fixtures/conic.acc", 0),
        case("degrees_conic.txt", "degrees fixtures/conic.acc", 0),
        case("degrees_sixlines.txt", "degrees fixtures/sixlines.acc", 0),
        case("degrees_bitangent.txt", "degrees fixtures/bitangent.acc", 0),
        case("degrees_badtriple.txt", "degrees fixtures/badtriple.acc", 1),
        case("degrees_conic.json", "--json degrees fixtures/conic.acc", 0),
        case("resolve_conic.txt", "resolve fixtures/conic.acc --script fixtures/conic.res", 0),
        case("resolve_conic_auto.txt", "resolve fixtures/conic.acc --auto", 0),
        case("resolve_conic_auto.json", "resolve fixtures/conic.acc --auto --json", 0),
        case("resolve_sixlines.txt", "resolve fixtures/sixlines.acc --script fixtures/sixlines.res", 0),
        case("resolve_bitangent.txt", "resolve fixtures/bitangent.acc --script fixtures/bitangent.res", 0),
        case("resolve_bitangent_auto.txt", "resolve fixtures/bitangent.acc --auto", 0),
        case("resolve_badtriple_auto.txt", "resolve fixtures/badtriple.acc --auto", 0),
        case("resolve_conic_budget.txt", "resolve fixtures/conic.acc --auto --budget 3", 1),
        case("resolve_conic_noscript.txt", "resolve fixtures/conic.acc", 2),
        case(
            "check_pencil_conic.txt",
            "check-pencil fixtures/conic.acc --pencil fixtures/conic.pen --script fixtures/conic.res",
            0,
        ),
        case("check_pencil_conic_bare.txt", "check-pencil fixtures/conic.acc --pencil fixtures/conic.pen", 0),
        case(
            "check_pencil_conic.json",
            "--json check-pencil fixtures/conic.acc --pencil fixtures/conic.pen --script fixtures/conic.res",
            0,
        ),
        case("check_pencil_sixlines.txt", "check-pencil fixtures/sixlines.acc --auto", 0),
        case(
            "check_pencil_bitangent.txt",
            "check-pencil fixtures/bitangent.acc --pencil fixtures/bitangent.pen --auto",
            0,
        ),
        case(
            "check_pencil_badtriple.txt",
            "check-pencil fixtures/badtriple.acc --pencil fixtures/bitangent.pen",
            2,
        ),
        case(
            "classify_conic.txt",
            "classify fixtures/conic.acc --script fixtures/conic.res --pencil fixtures/conic.pen",
            0,
        ),
        case(
            "classify_conic.json",
            "--json classify fixtures/conic.acc --script fixtures/conic.res --pencil fixtures/conic.pen",
            0,
        ),
        case(
            "classify_conic_family.txt",
            "classify fixtures/conic.acc --script fixtures/conic.res --family fixtures/conic.fam",
            0,
        ),
        case("classify_sixlines.txt", "classify fixtures/sixlines.acc --auto", 0),
        case(
            "classify_bitangent.txt",
            "classify fixtures/bitangent.acc --script fixtures/bitangent.res --pencil fixtures/bitangent.pen",
            0,
        ),
        case("classify_badtriple.txt", "classify fixtures/badtriple.acc --auto", 1),
        case(
            "refine_conic.txt",
            "refine fixtures/conic.acc --script fixtures/conic.res --pencil fixtures/conic.pen",
            0,
        ),
        case("refine_sixlines.txt", "refine fixtures/sixlines.acc --auto", 0),
        case("refine_sixlines.json", "--json refine fixtures/sixlines.acc --auto", 0),
        case(
            "refine_bitangent.txt",
            "refine fixtures/bitangent.acc --script fixtures/bitangent.res --pencil fixtures/bitangent.pen",
            0,
        ),
        case("validate_broken.txt", "validate fixtures/broken.acc", 2),
        case("validate_missing.txt", "validate fixtures/missing.acc", 2),
        case("unknown_subcommand.txt", "frobnicate fixtures/conic.acc", 2),
    ]
}

/// Path of a golden report.
pub fn golden_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures/golden")
        .join(name)
}

/// The text compared against a golden file: stdout on success, stderr otherwise.
pub fn golden_text(outcome: &acc_core::cli::Outcome) -> &str {
    if outcome.code == 0 {
        &outcome.stdout
    } else {
        &outcome.stderr
    }
}
