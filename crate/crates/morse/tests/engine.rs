use flowcat_core::{assemble_differential, identity_morphism, neumann_inverse, assemble_morphism_map, Rational};
use flowcat_morse::*;
use flowcat_oracles::CircleVariant;

fn betti(fc: &flowcat_core::FlowCategoryModel) -> Vec<usize> {
    let d = assemble_differential(fc).unwrap();
    assert!(d.verify_d_squared().is_empty());
    let b = flowcat_complexes::cohomology_betti(&d).unwrap();
    (0..=2).map(|n| b.get(&n).copied().unwrap_or(0)).collect()
}

#[test]
fn sphere_height_category() {
    let mc = build_morse_flow_category(&SurfaceModel::sphere_height(), &EngineConfig::default()).unwrap();
    assert_eq!(mc.levels.len(), 2);
    assert!(mc.lines.is_empty());
    assert_eq!(betti(&mc.model), vec![1, 0, 1]);
}

#[test]
fn no_rigid_lines_across_an_index_gap_of_two() {
    let s = SurfaceModel::sphere_height();
    let cfg = EngineConfig::default();
    let crit = find_critical_points(&s, &cfg).unwrap();
    let c = count_connecting_orbits(&s, &crit, 0, 1, &cfg).unwrap();
    assert_eq!(c.count(), 0);
    assert!(c.lines.is_empty());
}

#[test]
fn torus_lines_cancel_in_pairs() {
    let s = SurfaceModel::torus_tilted(0.1);
    let cfg = EngineConfig::default();
    let crit = find_critical_points(&s, &cfg).unwrap();
    for saddle in [1, 2] {
        let c = count_connecting_orbits(&s, &crit, 0, saddle, &cfg).unwrap();
        let mut signs: Vec<i64> = c.lines.iter().map(|l| l.sign).collect();
        signs.sort();
        assert_eq!(signs, vec![-1, 1], "minimum to saddle {saddle}");
        let c = count_connecting_orbits(&s, &crit, saddle, 3, &cfg).unwrap();
        assert_eq!(c.lines.len(), 2);
        assert_eq!(c.count(), 0, "saddle {saddle} to maximum");
    }
}

#[test]
fn torus_category_and_retilt_invariance() {
    let cfg = EngineConfig::default();
    let mut nets = Vec::new();
    for t in [0.1, 0.25] {
        let mc = build_morse_flow_category(&SurfaceModel::torus_tilted(t), &cfg).unwrap();
        assert_eq!(betti(&mc.model), vec![1, 2, 1]);
        for l in &mc.lines {
            let (a, b) = (&mc.critical[l.from], &mc.critical[l.to]);
            assert!(l.energy_bound_holds(b.value - a.value));
            assert_eq!(b.index, a.index + 1);
        }
        let mut net: Vec<(usize, usize, i64)> = Vec::new();
        for l in &mc.lines {
            let key = (mc.critical[l.from].index, mc.level_of(l.to).0);
            match net.iter_mut().find(|e| (e.0, e.1) == key) {
                Some(e) => e.2 += l.sign,
                None => net.push((key.0, key.1, l.sign)),
            }
        }
        net.sort();
        nets.push(net);
    }
    assert_eq!(nets[0], nets[1]);
}

#[test]
fn flipping_a_saddle_frame_keeps_cohomology() {
    let cfg = EngineConfig::default();
    let s = SurfaceModel::torus_tilted(0.1);
    let mut crit = find_critical_points(&s, &cfg).unwrap();
    let base: Vec<i64> = count_connecting_orbits(&s, &crit, 0, 1, &cfg).unwrap().lines.iter().map(|l| l.sign).collect();
    crit[1].orientation = -1;
    let flipped: Vec<i64> = count_connecting_orbits(&s, &crit, 0, 1, &cfg).unwrap().lines.iter().map(|l| l.sign).collect();
    assert_eq!(base.iter().map(|x| -x).collect::<Vec<_>>(), flipped);
}

#[test]
fn constant_function_uses_de_rham_generators() {
    let fc = build_category(&SurfaceModel::sphere_constant(), &EngineConfig::default()).unwrap();
    assert_eq!(fc.level_indices(), vec![0]);
    assert_eq!(betti(&fc), vec![1, 0, 1]);
}

#[test]
fn height_squared_falls_back_to_morse_bott() {
    let fc = build_category(&SurfaceModel::sphere_height_squared(), &EngineConfig::default()).unwrap();
    assert_eq!(fc.level(0).unwrap().c, 1);
    assert_eq!(fc.moduli_dim(0, 1), Some(1));
    assert_eq!(betti(&fc), vec![1, 0, 1]);
}

#[test]
fn morse_bott_differential_hits_both_poles() {
    for v in [CircleVariant::A, CircleVariant::B] {
        let ex = morsebott_s2(v, &EngineConfig::default()).unwrap();
        assert_eq!(ex.pole_signs[0], -ex.pole_signs[1]);
        for (_, raw) in &ex.raw {
            assert!((raw.abs() - 1.0).abs() < 1e-6);
        }
        let d = assemble_differential(&ex.model).unwrap();
        let blk = d.block(0, 1).unwrap();
        assert!(blk[(0, 0)].is_zero() && blk[(1, 0)].is_zero());
        assert_eq!(blk[(0, 1)].abs(), Rational::one());
        assert_eq!(blk[(0, 1)], -blk[(1, 1)].clone());
        assert_eq!(betti(&ex.model), vec![1, 0, 1]);
    }
}

#[test]
fn morse_identity_is_unitriangular() {
    let mc = build_morse_flow_category(&SurfaceModel::torus_tilted(0.1), &EngineConfig::default()).unwrap();
    let phi = assemble_morphism_map(&identity_morphism(&mc.model).unwrap()).unwrap();
    assert!(phi.is_unitriangular());
    assert!(neumann_inverse(&phi).unwrap().compose(&phi).unwrap().is_identity());
}

#[test]
fn continuation_between_heights_is_the_identity() {
    let c = sphere_continuation(0.6, &EngineConfig::default()).unwrap();
    assert_eq!(c.lines, vec![(0, 0, 1), (1, 1, 1)]);
    let phi = c.chain_map().unwrap();
    assert!(phi.verify_chain_map().is_empty());
    assert!(phi.is_identity());
}

#[test]
fn trajectories_dump_to_csv() {
    let s = SurfaceModel::torus_tilted(0.1);
    let mc = build_morse_flow_category(&s, &EngineConfig::default()).unwrap();
    let path = std::env::temp_dir().join(format!("flowcat-morse-{}.csv", std::process::id()));
    write_trajectories_csv(&path, &s, &mc.lines).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert!(text.starts_with("line,from,to,sign,step,x,y,z,f"));
    assert!(text.lines().count() > mc.lines.len());
}
