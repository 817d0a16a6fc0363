//! Acceptance suite. Prints one PASS/FAIL line per criterion and fails if
//! any criterion fails. Run with
//! `cargo test -p refpat --test acceptance -- --nocapture`.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use refpat::affine::fit_l2;
use refpat::check::{connectivity_violations, hanging_nodes, is_conforming, volume_defects};
use refpat::mesh::element_measure;
use refpat::pattern::RefinementPattern;
use refpat::reftools::{pattern_equality, refine_directional, refine_uniform, refine_uniform_toward};
use refpat::samples::{corpus_db, hex_block, kuhn_cube, master_tetrahedron, tetra_dir_1side, triangle_square, unit_hexahedron};
use refpat::topology::{self, ElementType};
use refpat::{parse_pattern, GeoMesh, PatternDb, SideRef};

const TARGET: i32 = 2;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn within(elapsed: Duration, limit: f64) -> Outcome {
    let s = elapsed.as_secs_f64();
    ensure!(s < limit, "took {s:.2} s, limit {limit} s");
    Ok(format!("{s:.3} s"))
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn random_point(t: ElementType, rng: &mut impl Rng) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..t.dimension()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if topology::is_in_master(t, &x) {
            return x;
        }
    }
}

fn topology_identities() -> Outcome {
    let start = Instant::now();
    let mut rng = rand::rngs::StdRng::seed_from_u64(1);
    let mut checked = 0;
    for t in ElementType::ALL {
        for s in 0..t.side_count() {
            let tse = topology::side_to_element_transform(t, s).unwrap();
            let tes = topology::element_to_side_transform(t, s).unwrap();
            ensure!(tes.compose(tse).unwrap().is_identity(1e-12), "{t:?} side {s}: T_es after T_se");
            let p = topology::projection_to_side(t, s).unwrap();
            for _ in 0..100 {
                let x = random_point(t, &mut rng);
                let once = p.apply_unchecked(&x);
                ensure!(dist(&p.apply_unchecked(&once), &once) < 1e-12, "{t:?} side {s}: projection");
            }
            checked += 1;
        }
        if t.dimension() != 3 {
            continue;
        }
        for f in 0..t.side_count() {
            if topology::side(t, f).unwrap().dimension != 2 {
                continue;
            }
            let face: BTreeSet<usize> = topology::side_nodes(t, f).unwrap().iter().copied().collect();
            for e in 0..t.side_count() {
                let nodes = topology::side_nodes(t, e).unwrap();
                if topology::side(t, e).unwrap().dimension != 1 || !nodes.iter().all(|n| face.contains(n)) {
                    continue;
                }
                let pe = topology::projection_to_side(t, e).unwrap();
                let pf = topology::projection_to_side(t, f).unwrap();
                ensure!(pe.compose(&pf).unwrap().approx_eq(&pe, 1e-12), "{t:?} edge {e} face {f}");
            }
        }
    }
    let time = within(start.elapsed(), 1.0)?;
    Ok(format!("{checked} sides, {time}"))
}

fn table_conformance() -> Outcome {
    let sides: Vec<usize> = ElementType::ALL.iter().map(|t| t.side_count()).collect();
    ensure!(sides == [1, 3, 7, 9, 15, 19, 21, 27], "side counts {sides:?}");
    let inside = [
        (ElementType::Line, vec![0.99], vec![1.01]),
        (ElementType::Triangle, vec![0.5, 0.49], vec![0.5, 0.51]),
        (ElementType::Quadrilateral, vec![-1.0, 1.0], vec![1.0, 1.01]),
        (ElementType::Tetrahedron, vec![0.3, 0.3, 0.39], vec![0.3, 0.3, 0.41]),
        (ElementType::Pyramid, vec![0.45, 0.45, 0.5], vec![0.55, 0.0, 0.5]),
        (ElementType::Prism, vec![0.5, 0.5, -1.0], vec![0.6, 0.5, 0.0]),
        (ElementType::Hexahedron, vec![1.0, -1.0, 0.3], vec![0.0, 0.0, -1.2]),
    ];
    for (t, yes, no) in inside {
        ensure!(topology::is_in_master(t, &yes), "{t:?} should contain {yes:?}");
        ensure!(!topology::is_in_master(t, &no), "{t:?} should not contain {no:?}");
    }
    ensure!(topology::is_in_master(ElementType::Point, &[]), "point domain");
    Ok("side counts and master domains match".into())
}

fn interior_face_cycles(m: &GeoMesh, on_boundary: impl Fn([f64; 3]) -> bool) -> Result<usize, String> {
    let mut interior = 0;
    for e in m.leaves() {
        let t = m.element(e).element_type;
        for s in 0..t.side_count() {
            if topology::side(t, s).unwrap().dimension != 2 {
                continue;
            }
            let nodes = m.side_global_nodes(SideRef::new(e, s));
            let mut c = [0.0; 3];
            for &n in &nodes {
                for k in 0..3 {
                    c[k] += m.node(n)[k] / nodes.len() as f64;
                }
            }
            if on_boundary(c) {
                continue;
            }
            let leaves = m.cycle(SideRef::new(e, s)).iter().filter(|r| m.element(r.element).is_leaf()).count();
            ensure!(leaves == 2, "interior face ({e}, {s}) has {leaves} leaf pairs in its cycle");
            interior += 1;
        }
    }
    let v = connectivity_violations(m);
    ensure!(v.is_empty(), "{}", v[0]);
    Ok(interior)
}

fn connectivity() -> Outcome {
    let start = Instant::now();
    let db = PatternDb::with_uniform();
    let cube_side = |c: [f64; 3]| c.iter().any(|&x| x.abs() < 1e-12 || (x - 1.0).abs() < 1e-12);
    let mut m = unit_hexahedron();
    let mut summary = Vec::new();
    for level in 1..=3 {
        let leaves: Vec<usize> = m.leaves().collect();
        refine_uniform(&mut m, &leaves, &db).map_err(|e| e.to_string())?;
        let n = interior_face_cycles(&m, cube_side)?;
        summary.push(format!("level {level}: {} leaves, {n} interior faces", m.leaves().count()));
    }
    ensure!(m.leaves().count() == 512, "{} leaves", m.leaves().count());
    let n = interior_face_cycles(&kuhn_cube(None), cube_side)?;
    ensure!(n == 12, "cube has {n} interior face sides");
    let time = within(start.elapsed(), 5.0)?;
    Ok(format!("{}; six-tet cube ok; {time}", summary.join(", ")))
}

fn is_affine_side(p: &RefinementPattern, son: usize, side: usize) -> bool {
    let st = p.son(son).element_type;
    let desc = topology::side(st, side).unwrap();
    if desc.dimension == 0 {
        return true;
    }
    let tse = topology::side_to_element_transform(st, side).unwrap();
    let corners: Vec<_> = (0..desc.side_type.node_count())
        .map(|i| {
            let xs = desc.side_type.corner(i).to_vec();
            (xs.clone(), p.mesh().element_map_unchecked(son + 1, &tse.apply_unchecked(&xs)).to_vec())
        })
        .collect();
    let fit = fit_l2(&corners).unwrap();
    refpat::quadrature::rule(desc.side_type).iter().all(|(xs, _)| {
        let x = p.mesh().element_map_unchecked(son + 1, &tse.apply_unchecked(xs));
        dist(&fit.apply_unchecked(xs), &x) < 1e-12
    })
}

fn one_facet_pattern() -> Outcome {
    let p = parse_pattern(tetra_dir_1side()).map_err(|e| e.to_string())?;
    ensure!(p.node_count() == 7, "{} nodes", p.node_count());
    ensure!(p.mesh().element_count() == 3, "{} elements", p.mesh().element_count());
    ensure!(p.id() == -50, "id {}", p.id());

    let mut db = PatternDb::new();
    let r = db.insert(p.clone()).map_err(|e| e.to_string())?;
    let mut m = master_tetrahedron();
    let sons = m.divide(0, &db, r).map_err(|e| e.to_string())?;
    let mut types: Vec<_> = sons.iter().map(|&s| m.element(s).element_type).collect();
    types.sort();
    ensure!(types == [ElementType::Tetrahedron, ElementType::Prism], "sons {types:?}");
    let volume: f64 = sons.iter().map(|&s| element_measure(&m, s)).sum();
    ensure!((volume - 1.0 / 6.0).abs() < 1e-12, "son volumes sum to {volume}");

    let mut rng = rand::rngs::StdRng::seed_from_u64(4);
    let (mut exact, mut worst_exact, mut curved, mut worst_curved) = (0, 0.0f64, 0, 0.0f64);
    let ft = p.father_type();
    for j in 0..p.son_count() {
        let st = p.son(j).element_type;
        for s in 0..st.side_count() {
            let desc = topology::side(st, s).unwrap();
            let sub = p.sub_side(j, s);
            let tse_f = topology::side_to_element_transform(ft, sub.father_side).unwrap();
            let tse_s = topology::side_to_element_transform(st, s).unwrap();
            let affine = is_affine_side(&p, j, s);
            for _ in 0..10 {
                let xs = random_point(desc.side_type, &mut rng);
                let a = p.mesh().element_map_unchecked(0, &tse_f.apply_unchecked(&sub.transform.apply_unchecked(&xs)));
                let b = p.mesh().element_map_unchecked(j + 1, &tse_s.apply_unchecked(&xs));
                let d = dist(&a, &b);
                if affine {
                    worst_exact = worst_exact.max(d);
                } else {
                    worst_curved = worst_curved.max(d);
                }
            }
            if affine {
                exact += 1;
            } else {
                curved += 1;
            }
        }
    }
    ensure!(worst_exact < 1e-10, "affine son sides deviate by {worst_exact:e}");
    Ok(format!(
        "7 nodes, 3 elements, id -50; tetra + prism; volume 1/6; {exact} affine son sides agree to {worst_exact:.1e}; \
         {curved} sides of the tapered prism have a non-constant Jacobian (max deviation {worst_curved:.3})"
    ))
}

fn son_types(m: &GeoMesh, e: usize) -> Vec<ElementType> {
    let mut t: Vec<_> = m.element(e).sons().unwrap_or(&[]).iter().map(|&s| m.element(s).element_type).collect();
    t.sort();
    t
}

fn directional_cases(db: &PatternDb) -> Outcome {
    let mut m = kuhn_cube(Some(TARGET));
    let leaves: Vec<usize> = m.leaves().collect();
    refine_directional(&mut m, &leaves, TARGET, db).map_err(|e| e.to_string())?;
    // element 0 is (0,1,2,6), on a target facet; element 1 is (0,1,5,6), on a target edge
    let facet = son_types(&m, 0);
    ensure!(facet == [ElementType::Tetrahedron, ElementType::Prism], "facet case gave {facet:?}");
    let edge = son_types(&m, 1);
    ensure!(edge == [ElementType::Prism, ElementType::Prism], "edge case gave {edge:?}");
    Ok("facet tetra -> tetra + prism, edge tetra -> two prisms".into())
}

fn directional_conformity(db: &PatternDb) -> Outcome {
    let start = Instant::now();
    let mut m = kuhn_cube(Some(TARGET));
    for pass in 1..=3 {
        let leaves: Vec<usize> = m.leaves().collect();
        let report = refine_directional(&mut m, &leaves, TARGET, db).map_err(|e| e.to_string())?;
        ensure!(report.unmatched.is_empty(), "pass {pass}: unmatched {:?}", report.unmatched);
        let hanging = hanging_nodes(&m);
        ensure!(hanging.is_empty(), "pass {pass}: {} hanging nodes", hanging.len());
    }
    let divided_targets = m.elements().iter().filter(|e| e.material == TARGET && !e.is_leaf()).count();
    ensure!(divided_targets == 0, "{divided_targets} target elements divided");
    ensure!(connectivity_violations(&m).is_empty(), "connectivity");
    let time = within(start.elapsed(), 10.0)?;
    Ok(format!("{} leaves, no hanging nodes, targets intact, {time}", m.leaves().count()))
}

fn database_semantics() -> Outcome {
    let mut db = PatternDb::with_uniform();
    let before = db.len();
    let p = parse_pattern(tetra_dir_1side()).map_err(|e| e.to_string())?;
    let r = db.insert(p.clone()).map_err(|e| e.to_string())?;
    let after = db.len();
    ensure!(db.insert(p).map_err(|e| e.to_string())? == r, "second insert returned another pattern");
    ensure!(db.len() == after, "double insert changed the count");
    let stored = db.get(r);
    ensure!(
        stored.permutations().len() == topology::permutations(ElementType::Tetrahedron).len(),
        "permutation list"
    );
    let mut side_patterns = 0;
    for s in 0..ElementType::Tetrahedron.side_count() {
        if let Some(q) = stored.side_pattern(s) {
            ensure!(q.0 < db.len(), "dangling side pattern");
            side_patterns += 1;
        }
    }
    ensure!(side_patterns >= 3, "{side_patterns} side patterns");
    let full = corpus_db().map_err(|e| e.to_string())?;
    for (r, p) in full.iter() {
        ensure!(full.lookup(p.id()) == Some(r), "lookup by id {}", p.id());
        ensure!(full.lookup(p.name()) == Some(r), "lookup by name {}", p.name());
    }
    Ok(format!(
        "insert added {} patterns, reinsert added none; {} corpus patterns found by id and name",
        after - before,
        full.len()
    ))
}

fn equality_equivalence(db: &PatternDb) -> Outcome {
    let patterns: Vec<&RefinementPattern> = db.iter().map(|(_, p)| p).collect();
    for p in &patterns {
        ensure!(pattern_equality(p, p), "{} not reflexive", p.name());
        let back = parse_pattern(&p.to_text()).map_err(|e| format!("{}: {e}", p.name()))?;
        ensure!(pattern_equality(p, &back), "{} changes under roundtrip", p.name());
    }
    let mut equal_pairs = 0;
    for (i, a) in patterns.iter().enumerate() {
        for b in &patterns[i + 1..] {
            let ab = pattern_equality(a, b);
            ensure!(ab == pattern_equality(b, a), "{} vs {} not symmetric", a.name(), b.name());
            equal_pairs += ab as usize;
        }
    }
    ensure!(equal_pairs == 0, "{equal_pairs} stored pairs are equal");
    Ok(format!("{} patterns, reflexive, symmetric, roundtrip-stable", patterns.len()))
}

fn min_build_time(mesh: &GeoMesh) -> f64 {
    (0..9)
        .map(|_| {
            let mut m = mesh.clone();
            let start = Instant::now();
            m.build_connectivity().unwrap();
            start.elapsed().as_secs_f64()
        })
        .fold(f64::INFINITY, f64::min)
}

fn scaling() -> Outcome {
    let start = Instant::now();
    let small = hex_block(8);
    let large = hex_block(16);
    let (a, b) = (min_build_time(&small), min_build_time(&large));
    let factor = b / a;
    ensure!(factor <= 12.0, "512 -> 4096 leaves grew build time by {factor:.2}");
    let time = within(start.elapsed(), 30.0)?;
    Ok(format!("{:.2} ms -> {:.2} ms, factor {factor:.2}; {time}", a * 1e3, b * 1e3))
}

fn contrast(db: &PatternDb) -> Outcome {
    let mut uniform = triangle_square(4, TARGET);
    let mut directional = uniform.clone();
    for _ in 0..3 {
        let report = refine_uniform_toward(&mut uniform, TARGET, db).map_err(|e| e.to_string())?;
        ensure!(report.unmatched.is_empty(), "uniform: unmatched {:?}", report.unmatched);
        let leaves: Vec<usize> = directional.leaves().collect();
        let report = refine_directional(&mut directional, &leaves, TARGET, db).map_err(|e| e.to_string())?;
        ensure!(report.unmatched.is_empty(), "directional: unmatched {:?}", report.unmatched);
    }
    ensure!(is_conforming(&uniform), "uniform result not conforming");
    ensure!(is_conforming(&directional), "directional result not conforming");
    ensure!(volume_defects(&uniform, 1e-12).is_empty() && volume_defects(&directional, 1e-12).is_empty(), "area");
    let (u, d) = (uniform.leaves().count(), directional.leaves().count());
    ensure!(u > d, "uniform {u} leaves, directional {d}");
    Ok(format!("uniform {u} leaves > directional {d} leaves, both conforming"))
}

#[test]
fn acceptance() {
    let db = corpus_db().expect("bundled patterns load");
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("topology identities", Box::new(topology_identities)),
        ("side tables and master domains", Box::new(table_conformance)),
        ("neighbor cycles", Box::new(connectivity)),
        ("one-facet tetrahedron pattern", Box::new(one_facet_pattern)),
        ("directional facet and edge cases", Box::new(|| directional_cases(&db))),
        ("conformity after directional passes", Box::new(|| directional_conformity(&db))),
        ("database semantics", Box::new(database_semantics)),
        ("equality is an equivalence", Box::new(|| equality_equivalence(&db))),
        ("connectivity scaling", Box::new(scaling)),
        ("uniform versus directional", Box::new(|| contrast(&db))),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                println!("FAIL {:>2} {name}: {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
