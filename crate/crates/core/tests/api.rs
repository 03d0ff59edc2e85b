use sparse_poincare_core::domain::{build_chains, whitney_decompose, CoveragePolicy, DomainSpec, DEFAULT_C_ADJ};
use sparse_poincare_core::grid::{DyadicCube, Grid, GridFunction, Pyramid};
use sparse_poincare_core::maximal::fractional_maximal;
use sparse_poincare_core::sparse::verify_pointwise_domination;
use sparse_poincare_core::weights::{aikawa_check, estimate_ainfty, DistanceSet, Weight};

#[test]
fn pyramid_sums_match_direct_integrals() {
    let g = Grid::unit(2, 4).unwrap();
    let f = GridFunction::build(g, |x| (3.0 * x[0]).sin() + x[1] * x[1]).unwrap();
    let pyr = Pyramid::new(&g, f.samples());
    for depth in 0..=4 {
        for i in 0..(1usize << (2 * depth)) {
            let q = g.dyadic_at(depth, i);
            let direct = f.integral_direct(&q).unwrap();
            assert!((pyr.sum(&q) * g.cell_volume() - direct).abs() < 1e-13);
            assert!((f.integral(&q).unwrap() - direct).abs() < 1e-13);
        }
    }
}

#[test]
fn whitney_cover_of_unit_square() {
    let d: DomainSpec = "box((0,0),(1,1))".parse().unwrap();
    let mut boman = Vec::new();
    for level in [4, 5] {
        let raster = d.rasterize(Grid::unit(2, level).unwrap()).unwrap();
        let w = whitney_decompose(&raster, CoveragePolicy::BoundaryLayer).unwrap();
        assert!((w.total_volume() - raster.measure()).abs() < 1e-12);
        let (lo, hi) = w.comparability().unwrap();
        assert!(lo >= 1.0 - 1e-12 && hi <= 4.0 + 1e-12);
        boman.push(build_chains(&w, DEFAULT_C_ADJ).unwrap().boman_constant());
    }
    assert!(boman.iter().all(|&b| b > 0));
}

#[test]
fn fractional_maximal_of_constant() {
    let g = Grid::unit(1, 5).unwrap();
    let f = GridFunction::constant(g, 2.0).unwrap();
    let m = fractional_maximal(&f, 0.0, &DyadicCube::ROOT).unwrap();
    assert!(m.field.samples().iter().all(|&v| (v - 2.0).abs() < 1e-14));
}

#[test]
fn lebesgue_weight_estimate_and_domination() {
    let g = Grid::unit(2, 5).unwrap();
    let w = Weight::lebesgue(g);
    let e = estimate_ainfty(&w, &DyadicCube::ROOT, 1.0).unwrap();
    assert!((e.c - 1.0).abs() < 1e-12);
    let f = GridFunction::build(g, |x| if x[0] + x[1] > 1.2 { 5.0 } else { -1.0 }).unwrap();
    let r = verify_pointwise_domination(&f, &w, &DyadicCube::ROOT, 2.0, e.c, e.delta).unwrap();
    assert!(r.passed());
}

#[test]
fn aikawa_constant_of_half_power_at_origin() {
    let set = DistanceSet::Points(vec![vec![0.0]]);
    let r = aikawa_check(&set, -0.5, &[1.0, 0.25], &[vec![0.0]], 12).unwrap();
    assert!((r.constant - 2.0).abs() / 2.0 < 0.005);
    assert!(r.constant < 2.0);
}
