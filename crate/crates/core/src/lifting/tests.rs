use super::*;
use crate::connection::{solve_min_connection, ConnSegment, Connection, EndTag};
use crate::cover::square;
use crate::error::Error;
use crate::geom::{unit_disk, Segment, Vec2};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn v(x: f64, y: f64) -> Vec2 {
    Vec2::new(x, y)
}

fn disk_grid(n: usize) -> Grid {
    Grid::for_domain(&unit_disk(), n).unwrap()
}

/// Node loop around the square of half-width `r` centred at the origin, counterclockwise.
fn square_loop(g: &Grid, r: f64) -> Vec<usize> {
    let lo = g.nearest_node(v(-r, -r)).unwrap();
    let hi = g.nearest_node(v(r, r)).unwrap();
    let (i0, j0) = g.ij(lo);
    let (i1, j1) = g.ij(hi);
    let mut out = Vec::new();
    for i in i0..i1 {
        out.push(g.idx(i, j0));
    }
    for j in j0..j1 {
        out.push(g.idx(i1, j));
    }
    for i in (i0 + 1..=i1).rev() {
        out.push(g.idx(i, j1));
    }
    for j in (j0 + 1..=j1).rev() {
        out.push(g.idx(i0, j));
    }
    out
}

fn seg(p: Vec2, q: Vec2, a: EndTag, b: EndTag) -> ConnSegment {
    ConnSegment {
        segment: Segment::new(p, q),
        ends: (a, b),
    }
}

/// Dual degree of every cell in an edge set.
fn dual_degrees(g: &Grid, e: &EdgeSet) -> Vec<usize> {
    let mut d = vec![0; g.cell_count()];
    for x in e.edges(g) {
        let (a, b) = g.edge_cells(x);
        d[a] += 1;
        d[b] += 1;
    }
    d
}

#[test]
fn loop_parity_examples() {
    let g = disk_grid(64);
    let ring = square_loop(&g, 0.5);
    let c = GridField::constant(&g, v(1.0, 0.0));
    assert_eq!(loop_parity(&c, &ring).unwrap(), (0, true));
    let a = v(0.013, 0.021);
    assert_eq!(loop_parity(&vortex_field(&g, &[a], 1), &ring).unwrap(), (1, false));
    assert_eq!(loop_parity(&vortex_field(&g, &[a, a], 1), &ring).unwrap(), (2, true));
    assert_eq!(loop_parity(&vortex_field(&g, &[a], -1), &ring).unwrap(), (-1, false));
    // A single cell around the defect steps by about pi/2 per side.
    let cell = g.cell_of(a).unwrap();
    let corners = g.cell_corners(cell);
    let q = vortex_field(&g, &[g.cell_center(cell)], 1);
    assert!(matches!(loop_parity(&q, &corners), Err(Error::Resolution { .. })));
}

#[test]
fn singularity_examples() {
    let g = disk_grid(64);
    let a = v(0.1013, -0.0517);
    let r = detect_singularities(&vortex_field(&g, &[a], 1));
    assert_eq!(r.defects.len(), 1);
    let d = &r.defects[0];
    assert_eq!((d.winding, d.orientable, d.touches_boundary), (1, false, false));
    assert!(d.center.dist(a) < g.h);
    let r = detect_singularities(&vortex_field(&g, &[a, a], 1));
    assert_eq!((r.defects.len(), r.defects[0].winding, r.defects[0].orientable), (1, 2, true));
    assert!(detect_singularities(&GridField::constant(&g, v(0.0, 1.0))).defects.is_empty());
}

#[test]
fn plaquette_windings_sum_to_the_contour_winding() {
    let g = disk_grid(64);
    let pts = [v(-0.3, 0.11), v(0.25, -0.2), v(0.05, 0.33)];
    let q = vortex_field(&g, &pts, 1);
    let r = detect_singularities(&q);
    let ring = square_loop(&g, 0.6);
    assert_eq!(r.total_winding(), loop_parity(&q, &ring).unwrap().0);
    assert_eq!(r.non_orientable().count(), 3);
}

fn two_defect_setup(n: usize) -> (Grid, Vec<Vec2>, GridField, Connection) {
    let d = unit_disk();
    let g = Grid::for_domain(&d, n).unwrap();
    let pts = vec![v(-0.3, 0.0), v(0.3, 0.0)];
    let q = vortex_field(&g, &pts, 1);
    let cuts = solve_min_connection(&d, &pts).unwrap();
    (g, pts, q, cuts)
}

fn assert_roundtrip(q: &GridField, l: &Lifting) {
    for k in 0..q.grid.len() {
        if q.grid.mask[k] && !l.core[k] {
            let qq = q.values[k] / q.values[k].norm();
            assert!(square(l.directors.values[k]).dist(qq) < 1e-12, "node {k}");
        }
    }
}

#[test]
fn lifting_of_a_cut_pair() {
    let (g, _, q, cuts) = two_defect_setup(64);
    let l = construct_lifting(&q, &cuts).unwrap();
    assert_roundtrip(&q, &l);
    assert_eq!(l.jumps, l.band.edges);
    // The band is a lattice row of vertical edges across the segment.
    assert!(l.jumps.edges(&g).all(|e| e.axis == 1));
    assert!((l.jumps.length(g.h) - 0.6).abs() <= 2.0 * g.h);
}

#[test]
fn defect_free_field_lifts_globally() {
    let g = disk_grid(48);
    let q = GridField::from_fn(&g, |x| Vec2::from_angle(0.7 * x.x + 0.3 * x.y * x.y));
    let l = construct_lifting(&q, &Connection::empty()).unwrap();
    assert!(l.jumps.is_empty());
    assert_roundtrip(&q, &l);
}

#[test]
fn single_defect_cut_to_the_boundary() {
    let d = unit_disk();
    let g = Grid::for_domain(&d, 64).unwrap();
    let pts = [v(0.55, 0.123)];
    let cuts = solve_min_connection(&d, &pts).unwrap();
    let q = vortex_field(&g, &pts, 1);
    let l = construct_lifting(&q, &cuts).unwrap();
    assert!(!l.jumps.is_empty());
    assert_eq!(l.jumps, l.band.edges);
    assert_roundtrip(&q, &l);
    let deg = dual_degrees(&g, &l.jumps);
    let defect = g.cell_of(pts[0]).unwrap();
    assert_eq!(deg[defect], 1);
}

#[test]
fn missing_cut_is_a_parity_error() {
    let (_, _, q, _) = two_defect_setup(48);
    let err = construct_lifting(&q, &Connection::empty()).unwrap_err();
    assert!(matches!(err, Error::Parity { winding: 1, crossings: 0, .. }), "{err:?}");
}

#[test]
fn essential_boundary_examples() {
    let g = disk_grid(32);
    let k = g.nearest_node(v(0.1, 0.1)).unwrap();
    let mut a = PixelSet::empty(&g);
    a.cells[k] = true;
    let b = essential_boundary(&g, &a);
    assert_eq!(b.count(), 4);
    assert_eq!(b.length(g.h), 4.0 * g.h);
    assert!(essential_boundary(&g, &PixelSet::full(&g)).is_empty());
    let (i0, j0) = g.ij(k);
    for size in 1..6 {
        let blk = PixelSet {
            cells: (0..g.len())
                .map(|m| {
                    let (i, j) = g.ij(m);
                    (i0..i0 + size).contains(&i) && (j0..j0 + size).contains(&j)
                })
                .collect(),
        };
        assert_eq!(essential_boundary(&g, &blk).count(), 4 * size);
    }
}

#[test]
fn symdiff_trivial_cases() {
    let g = disk_grid(32);
    let a = random_pixel_set(&g, &mut ChaCha8Rng::seed_from_u64(1));
    assert!(symdiff_boundary_check(&g, &a, &PixelSet::empty(&g)));
    assert!(symdiff_boundary_check(&g, &a, &a));
}

#[test]
fn la_edge_set_examples() {
    let (g, _, _, cuts) = two_defect_setup(64);
    let band = CutBand::new(&g, &cuts);
    assert_eq!(la_edge_set(&g, &PixelSet::empty(&g), &band), band.edges);
    // Tiny square away from the cut: disjoint union.
    let sq = PixelSet::from_fn(&g, |x| (x.x - 0.2).abs() < 0.05 && (x.y + 0.5).abs() < 0.05);
    let la = la_edge_set(&g, &sq, &band);
    assert_eq!(la.count(), band.edges.count() + essential_boundary(&g, &sq).count());
    assert!(band.edges.is_subset(&la));
    // A straight cut spanning the domain, and A one side of it.
    let y0 = 0.01;
    let span = Connection::from_segments(vec![seg(
        v(-1.2, y0),
        v(1.2, y0),
        EndTag::Boundary(v(-1.2, y0)),
        EndTag::Boundary(v(1.2, y0)),
    )]);
    let band = CutBand::new(&g, &span);
    let upper = PixelSet::from_fn(&g, |x| x.y > y0);
    assert_eq!(essential_boundary(&g, &upper), band.edges);
    assert!(la_edge_set(&g, &upper, &band).is_empty());
    let upper_right = PixelSet::from_fn(&g, |x| x.y > y0 && x.x > 0.0);
    let la = la_edge_set(&g, &upper_right, &band);
    let bd = essential_boundary(&g, &upper_right);
    assert_eq!(la, bd.symmetric_difference(&band.edges));
    assert!(la.difference(&band.edges).count() > 0);
    assert!(la.union(&bd).count() == band.edges.union(&bd).count());
}

#[test]
fn lifting_set_correspondence_examples() {
    let (g, _, q, cuts) = two_defect_setup(64);
    let l = construct_lifting(&q, &cuts).unwrap();
    let (v0, j0) = lifting_from_set(&l, &PixelSet::empty(&g));
    assert_eq!(v0, l.directors);
    assert_eq!(j0, l.jumps);
    let (vf, jf) = lifting_from_set(&l, &PixelSet::full(&g));
    assert_eq!(jf, l.jumps);
    assert_eq!(set_from_lifting(&l, &vf).unwrap(), PixelSet::full(&g));
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let a = random_pixel_set(&g, &mut rng);
        let (va, ja) = lifting_from_set(&l, &a);
        assert_eq!(ja, la_edge_set(&g, &a, &l.band));
        assert_eq!(set_from_lifting(&l, &va).unwrap(), a);
    }
    let rotated = GridField::from_fn(&g, |_| Vec2::from_angle(0.3));
    let mut bad = l.directors.clone();
    let k = (0..g.len()).find(|&k| g.mask[k]).unwrap();
    bad.values[k] = Vec2::new(l.directors.values[k].y, -l.directors.values[k].x);
    assert!(matches!(set_from_lifting(&l, &bad), Err(Error::Mismatch { .. })));
    let _ = rotated;
}

#[test]
fn jordan_examples() {
    let g = disk_grid(32);
    let none = Contacts::new(&g, None, &[]);
    let k = g.nearest_node(v(0.0, 0.0)).unwrap();
    let mut a = PixelSet::empty(&g);
    a.cells[k] = true;
    let d = jordan_decompose(&g, &essential_boundary(&g, &a), &none).unwrap();
    assert_eq!((d.loops.len(), d.arcs.len()), (1, 0));
    assert_eq!(d.loops[0].0.len(), 4);
    let two = PixelSet::from_fn(&g, |x| {
        ((x.x + 0.4).abs() < 0.1 && x.y.abs() < 0.1) || ((x.x - 0.4).abs() < 0.1 && x.y.abs() < 0.2)
    });
    let d = jordan_decompose(&g, &essential_boundary(&g, &two), &none).unwrap();
    assert_eq!((d.loops.len(), d.arcs.len()), (2, 0));
    let mut odd = EdgeSet::empty(&g);
    odd.insert(&g, Edge { i: g.ij(k).0, j: g.ij(k).1, axis: 0 });
    assert!(matches!(jordan_decompose(&g, &odd, &none), Err(Error::Malformed { .. })));
}

#[test]
fn block_over_a_cut_has_cut_contact_arcs() {
    let (g, _, _, cuts) = two_defect_setup(64);
    let band = CutBand::new(&g, &cuts);
    let contacts = Contacts::new(&g, Some(&band), &[]);
    let blk = PixelSet::from_fn(&g, |x| x.x.abs() < 0.1 && x.y.abs() < 0.1);
    let d = jordan_decompose(&g, &essential_boundary(&g, &blk), &contacts).unwrap();
    assert!(d
        .arcs
        .iter()
        .any(|a| a.start.1 == ContactTag::CutContact && a.end.1 == ContactTag::CutContact && !a.is_closed()));
    assert_eq!(d.edge_count(), essential_boundary(&g, &blk).count());
}

#[test]
fn arc_taxonomy() {
    let g = disk_grid(64);
    let tag = EndTag::Point;
    // Two parallel interior cuts; a slab between them has essential arcs of type (a).
    let cuts = Connection::from_segments(vec![
        seg(v(-0.2, -0.3), v(-0.2, 0.3), tag(0), tag(1)),
        seg(v(0.2, -0.3), v(0.2, 0.3), tag(2), tag(3)),
    ]);
    let band = CutBand::new(&g, &cuts);
    let contacts = Contacts::new(&g, Some(&band), &[]);
    let slab = PixelSet::from_fn(&g, |x| x.x.abs() < 0.2 && x.y.abs() < 0.1);
    let d = jordan_decompose(&g, &essential_boundary(&g, &slab), &contacts).unwrap();
    let cls = classify_arcs(&d.arcs, &band, &cuts);
    assert_eq!(cls.iter().filter(|c| **c == ArcClass::EssentialDistinctSegments).count(), 2);
    assert!(cls.iter().all(|c| matches!(c, ArcClass::EssentialDistinctSegments | ArcClass::SameSegment)));

    // A cut reaching the boundary: arcs from the boundary to it are type (iv).
    let foot = v(0.999, 0.01);
    let cuts = Connection::from_segments(vec![seg(v(0.5, 0.01), foot, tag(0), EndTag::Boundary(foot))]);
    let band = CutBand::new(&g, &cuts);
    let contacts = Contacts::new(&g, Some(&band), &[]);
    let box_a = PixelSet::from_fn(&g, |x| x.x > 0.7 && x.y.abs() < 0.2);
    let d = jordan_decompose(&g, &essential_boundary(&g, &box_a), &contacts).unwrap();
    let cls = classify_arcs(&d.arcs, &band, &cuts);
    assert!(cls.contains(&ArcClass::BoundaryToBoundarySegment));
    assert!(!cls.iter().any(|c| c.is_essential()));

    // An interior cut: boundary-to-cut arcs are essential of type (b).
    let cuts = Connection::from_segments(vec![seg(v(-0.3, 0.01), v(0.3, 0.01), tag(0), tag(1))]);
    let band = CutBand::new(&g, &cuts);
    let contacts = Contacts::new(&g, Some(&band), &[]);
    let quad = PixelSet::from_fn(&g, |x| x.x > 0.0 && x.y > 0.01);
    let d = jordan_decompose(&g, &essential_boundary(&g, &quad), &contacts).unwrap();
    let cls = classify_arcs(&d.arcs, &band, &cuts);
    assert!(cls.contains(&ArcClass::EssentialBoundaryToInterior));

    // Half-plane away from cuts: a single boundary-to-boundary arc.
    let top = PixelSet::from_fn(&g, |x| x.y > 0.5);
    let d = jordan_decompose(&g, &essential_boundary(&g, &top), &contacts).unwrap();
    assert_eq!(classify_arcs(&d.arcs, &band, &cuts), vec![ArcClass::BoundaryToBoundary]);

    // A loop.
    let small = PixelSet::from_fn(&g, |x| x.dist(v(0.0, -0.5)) < 0.1);
    let d = jordan_decompose(&g, &essential_boundary(&g, &small), &contacts).unwrap();
    assert_eq!(d.loops.len(), 1);
}

#[test]
fn lower_bound_examples() {
    let audit = LowerBoundAudit::new(&unit_disk(), &[v(-0.3, 0.0), v(0.3, 0.0)], 64).unwrap();
    let g = &audit.grid;
    let empty = audit.check(&PixelSet::empty(g)).unwrap();
    assert!(empty.pass);
    assert!(empty.lattice_length >= empty.min_connection - g.h);
    let s = audit.run(50, 7);
    assert_eq!(s.passed, 50);
    assert!(s.min_margin >= 0.0);

    let w = audit.band_shift_witness();
    let la = audit.la(&w);
    assert_eq!(la.count(), audit.band.edges.count() + 2);
    let dec = jordan_decompose(g, &la, &audit.contacts()).unwrap();
    assert!(dec.loops.is_empty());
    assert_eq!(dec.arcs.len(), 1);
    let ends = [dec.arcs[0].start, dec.arcs[0].end];
    assert!(ends.iter().all(|e| e.1 == ContactTag::DefectCell));
    assert_ne!(ends[0].0, ends[1].0);
    let chk = audit.check(&w).unwrap();
    assert!(chk.corrected_length <= chk.lattice_length);
}

#[test]
fn audit_is_deterministic() {
    let audit = LowerBoundAudit::new(&unit_disk(), &[v(-0.3, 0.0), v(0.3, 0.0)], 32).unwrap();
    let a = audit.run(20, 3);
    let b = audit.run(20, 3);
    assert_eq!(a.min_margin, b.min_margin);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn symdiff_identity(seed in 0u64..10_000) {
        let g = disk_grid(48);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_pixel_set(&g, &mut rng);
        let b = random_pixel_set(&g, &mut rng);
        prop_assert!(symdiff_boundary_check(&g, &a, &b));
    }

    #[test]
    fn parity_conservation_and_length_preservation(seed in 0u64..10_000) {
        let audit = LowerBoundAudit::new(&unit_disk(), &[v(-0.3, 0.0), v(0.3, 0.0)], 48).unwrap();
        let g = &audit.grid;
        let a = random_pixel_set(g, &mut ChaCha8Rng::seed_from_u64(seed));
        let la = audit.la(&a);
        let deg = dual_degrees(g, &la);
        for c in 0..g.cell_count() {
            if !g.cell_full(c) {
                continue;
            }
            let expect = audit.defect_cells.contains(&c) as usize;
            prop_assert_eq!(deg[c] % 2, expect, "cell {}", c);
        }
        let dec = jordan_decompose(g, &la, &audit.contacts()).unwrap();
        prop_assert_eq!(dec.edge_count(), la.count());
        prop_assert!(audit.check(&a).unwrap().pass);
    }

    #[test]
    fn liftings_with_equal_jumps_differ_globally(seed in 0u64..10_000) {
        let (g, _, q, cuts) = two_defect_setup(48);
        let l = construct_lifting(&q, &cuts).unwrap();
        let a = random_pixel_set(&g, &mut ChaCha8Rng::seed_from_u64(seed));
        let (_, ja) = lifting_from_set(&l, &a);
        // Same jumps as the reference iff A has no boundary, i.e. A is empty or everything.
        if ja == l.jumps {
            prop_assert!(a == PixelSet::empty(&g) || a == PixelSet::full(&g));
        }
    }
}
