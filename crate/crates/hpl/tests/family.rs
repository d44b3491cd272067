use flowcat_complexes::{cohomology_betti, nonzero_betti};
use flowcat_hpl::{
    harmonic_data, perturbed_complex, seeded_family, verify_perturbation_data, FamilyConfig, HplSign,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn perturbed_complex_is_quasi_isomorphic(seed in any::<u64>()) {
        let a = seeded_family(seed, 1, &FamilyConfig::default()).remove(0);
        let pd = harmonic_data(&a).unwrap();
        prop_assert!(verify_perturbation_data(&a, &pd).unwrap().is_empty());
        let small = perturbed_complex(&a, &pd, HplSign::Signed).unwrap();
        prop_assert!(small.verify_d_squared().is_empty());
        prop_assert!(small.is_filtered());
        prop_assert_eq!(
            nonzero_betti(&cohomology_betti(&small).unwrap()),
            nonzero_betti(&cohomology_betti(&a).unwrap())
        );
    }
}

#[test]
fn unsigned_zigzags_lose_the_quasi_isomorphism_on_a_pinned_complex() {
    let a = seeded_family(1, 15, &FamilyConfig::default()).remove(14);
    let pd = harmonic_data(&a).unwrap();
    let signed = perturbed_complex(&a, &pd, HplSign::Signed).unwrap();
    let unsigned = perturbed_complex(&a, &pd, HplSign::Unsigned).unwrap();
    let original = nonzero_betti(&cohomology_betti(&a).unwrap());
    assert_eq!(nonzero_betti(&cohomology_betti(&signed).unwrap()), original);
    let lost = !unsigned.verify_d_squared().is_empty()
        || nonzero_betti(&cohomology_betti(&unsigned).unwrap()) != original;
    assert!(lost);
}
