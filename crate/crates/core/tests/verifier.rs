//! End-to-end checks of the empirical MDP-symmetry verifier on the built-in
//! environments, including deliberately corrupted groups.

use symmrl::envs::{cartpole_group, make_env, planar_group, CARTPOLE_ID, PLANAR_REACH_ID};
use symmrl::rng::{rng_stream, stream};
use symmrl::symmdp::{verify_mdp_symmetry, LinearMap, SymmetryGroup, SymmetryTransform};

#[test]
fn builtin_env_group_pairs_pass_at_tight_tolerance() {
    for (env_id, group) in [
        (CARTPOLE_ID, cartpole_group()),
        (PLANAR_REACH_ID, planar_group()),
    ] {
        let mut env = make_env(env_id).unwrap();
        let mut rng = rng_stream(0, stream::VERIFIER);
        let report =
            verify_mdp_symmetry(env.as_mut(), &group, 1000, 1e-9, &mut rng).unwrap();
        assert!(
            report.pass(),
            "{env_id}: max violation {}",
            report.max_violation()
        );
        // built-in dynamics are equivariant bitwise, not just within tol
        assert_eq!(report.max_violation(), 0.0, "{env_id}");
    }
}

#[test]
fn corrupted_observation_sign_is_detected() {
    // theta_dot sign not flipped in the cartpole mirror transform
    let mut group = cartpole_group();
    *group.transforms_mut()[1].state_map.entry_mut(2, 2) = 1.0;
    let mut env = make_env(CARTPOLE_ID).unwrap();
    let mut rng = rng_stream(1, stream::VERIFIER);
    let report = verify_mdp_symmetry(env.as_mut(), &group, 200, 1e-9, &mut rng).unwrap();
    assert!(!report.pass());
    assert!(report.per_transform[0].max_dynamics_violation > 0.0);
}

#[test]
fn corrupted_action_sign_is_detected() {
    let mut group = cartpole_group();
    *group.transforms_mut()[1].action_map.entry_mut(0, 0) = 1.0;
    let mut env = make_env(CARTPOLE_ID).unwrap();
    let mut rng = rng_stream(2, stream::VERIFIER);
    let report = verify_mdp_symmetry(env.as_mut(), &group, 200, 1e-9, &mut rng).unwrap();
    assert!(!report.pass());
    assert!(report.max_violation() > 0.0);
}

#[test]
fn identity_only_group_passes_with_zero_violation() {
    let mut env = make_env(PLANAR_REACH_ID).unwrap();
    let group = SymmetryGroup::identity_only(6, 2);
    let mut rng = rng_stream(3, stream::VERIFIER);
    let report = verify_mdp_symmetry(env.as_mut(), &group, 50, 1e-9, &mut rng).unwrap();
    assert!(report.pass());
    assert_eq!(report.max_violation(), 0.0);
    assert!(report.per_transform.is_empty());
}

#[test]
fn structural_corruptions_fail_group_verification() {
    // missing identity
    let no_identity = SymmetryGroup::new(vec![SymmetryTransform::new(
        "mirror",
        LinearMap::neg_identity(3),
        LinearMap::neg_identity(1),
    )])
    .unwrap();
    let report = no_identity.verify(1e-9);
    assert!(!report.pass());
    assert!(report.failed_checks().iter().any(|c| c.name == "identity_first"));

    // non-invertible state map
    let mut degenerate = cartpole_group();
    *degenerate.transforms_mut()[1].state_map.entry_mut(1, 1) = 0.0;
    let report = degenerate.verify(1e-9);
    assert!(!report.pass());
    assert!(report
        .failed_checks()
        .iter()
        .any(|c| c.name.starts_with("invertible")));
}

#[test]
fn verifier_requires_matching_dimensions() {
    let mut env = make_env(CARTPOLE_ID).unwrap();
    let mut rng = rng_stream(4, stream::VERIFIER);
    let wrong = SymmetryGroup::identity_only(6, 2);
    assert!(verify_mdp_symmetry(env.as_mut(), &wrong, 10, 1e-9, &mut rng).is_err());
}
