use std::collections::BTreeMap;
use std::sync::Arc;

use flowcat_complexes::{ChainMap, Tower};
use flowcat_core::{assemble_differential, assemble_morphism_map, identity_morphism, identity_morphism_between, IdentityOracle};
use flowcat_hpl::{seeded_family, FamilyConfig};
use flowcat_linalg::rank;
use flowcat_morse::{build_morse_flow_category, morsebott_s2, EngineConfig, SurfaceModel};
use flowcat_oracles::CircleVariant;
use flowcat_spectral::*;
use proptest::prelude::*;

fn bott(v: CircleVariant) -> flowcat_core::FlowCategoryModel {
    morsebott_s2(v, &EngineConfig::default()).unwrap().model
}

fn morse(s: SurfaceModel) -> flowcat_core::FlowCategoryModel {
    build_morse_flow_category(&s, &EngineConfig::default()).unwrap().model
}

#[test]
fn sphere_height_degenerates_at_e1() {
    let fc = FilteredComplex::new(assemble_differential(&morse(SurfaceModel::sphere_height())).unwrap()).unwrap();
    let pages = spectral_sequence(&fc).unwrap();
    for page in &pages {
        assert_eq!(page.dims(), BTreeMap::from([(0, 1), (1, 1)]));
    }
    assert!(e_infinity_vs_graded(&fc).unwrap().is_empty());
}

#[test]
fn morse_bott_sphere_pages() {
    let fc = FilteredComplex::new(assemble_differential(&bott(CircleVariant::A)).unwrap()).unwrap();
    let e1 = compute_page(&fc, 1).unwrap();
    assert_eq!(e1.dims(), BTreeMap::from([(0, 2), (1, 2)]));
    assert_eq!(rank(&e1.differential[&0]), 1);
    let e2 = compute_page(&fc, 2).unwrap();
    assert_eq!(e2.dims(), BTreeMap::from([(0, 1), (1, 1)]));
    assert_eq!(compute_page(&fc, 5).unwrap().dims(), e2.dims());
    assert!(e_infinity_vs_graded(&fc).unwrap().is_empty());
}

#[test]
fn torus_sequence_converges() {
    let fc = FilteredComplex::new(assemble_differential(&morse(SurfaceModel::torus_tilted(0.1))).unwrap()).unwrap();
    let pages = spectral_sequence(&fc).unwrap();
    let last = pages.last().unwrap();
    assert_eq!(last.dims().values().sum::<usize>(), 4);
    assert!(e_infinity_vs_graded(&fc).unwrap().is_empty());
}

#[test]
fn identity_morphism_is_identity_on_e1() {
    for model in [bott(CircleVariant::A), morse(SurfaceModel::torus_tilted(0.25))] {
        let phi = assemble_morphism_map(&identity_morphism(&model).unwrap()).unwrap();
        for m in induced_e1(&phi).unwrap().values() {
            assert!(m.is_identity());
        }
    }
}

#[test]
fn cone_at_r1_matches_cone_of_e1_maps() {
    let (a, b) = (bott(CircleVariant::A), bott(CircleVariant::B));
    let phi = assemble_morphism_map(&identity_morphism_between(&a, &b, Arc::new(IdentityOracle::default())).unwrap()).unwrap();
    let c = assemble_differential(&a).unwrap();
    let tower = Tower::new(vec![c.clone(), c.clone(), c.clone()], vec![phi.clone(), ChainMap::zero(&c, &c)]).unwrap();
    for f in tower.maps() {
        let rows = cone_e1_comparison(f).unwrap();
        assert!(!rows.is_empty());
        assert!(rows.iter().all(ConeRow::agrees), "{rows:?}");
    }
}

#[test]
fn cone_of_a_level_raising_map() {
    let model = morse(SurfaceModel::torus_tilted(0.1));
    let phi = assemble_morphism_map(&identity_morphism(&model).unwrap()).unwrap();
    let twice = phi.sum(&phi).unwrap();
    assert!(cone_e1_comparison(&twice).unwrap().iter().all(ConeRow::agrees));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_filtered_complexes(seed in 0u64..10_000) {
        let c = seeded_family(seed, 1, &FamilyConfig::default()).remove(0);
        let fc = FilteredComplex::new(c).unwrap();
        let pages = spectral_sequence(&fc).unwrap();
        let n = pages.len();
        prop_assert_eq!(pages[n - 1].dims(), pages[n - 2].dims());
        prop_assert!(e_infinity_vs_graded(&fc).unwrap().is_empty());
    }

    #[test]
    fn identity_cone_matches_at_r1(seed in 0u64..10_000) {
        let c = seeded_family(seed, 1, &FamilyConfig::default()).remove(0);
        let rows = cone_e1_comparison(&ChainMap::identity(&c)).unwrap();
        prop_assert!(rows.iter().all(ConeRow::agrees));
    }
}
