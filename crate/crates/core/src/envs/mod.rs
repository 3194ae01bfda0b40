//! Built-in symmetric environments.
//!
//! Both environments are constructed so the declared symmetry holds *bitwise*:
//! dynamics are assembled from odd/even primitives that commute exactly with
//! the group's signed-permutation maps. `verify_mdp_symmetry` at 1e-9 is the
//! load-bearing property every downstream symmetry claim rests on.

mod cartpole;
mod planar;

pub use cartpole::CartPole;
pub use planar::PlanarReach;

use crate::error::{Error, Result};
use crate::symmdp::{Env, LinearMap, SymmetryGroup, SymmetryTransform};
use std::f64::consts::PI;

pub const CARTPOLE_ID: &str = "cartpole";
pub const PLANAR_REACH_ID: &str = "planar-reach";

/// Environment ids accepted by [`make_env`], config files, and CLI flags.
pub fn env_ids() -> &'static [&'static str] {
    &[CARTPOLE_ID, PLANAR_REACH_ID]
}

/// Instantiate a built-in environment by id.
pub fn make_env(id: &str) -> Result<Box<dyn Env>> {
    match id {
        CARTPOLE_ID => Ok(Box::new(CartPole::new())),
        PLANAR_REACH_ID => Ok(Box::new(PlanarReach::new())),
        other => Err(Error::config(format!(
            "unknown environment '{other}' (expected one of {:?})",
            env_ids()
        ))),
    }
}

/// CartPole's 2-fold group: identity and the joint sign flip of the
/// observation `(v, theta, theta_dot)` and the velocity command.
pub fn cartpole_group() -> SymmetryGroup {
    SymmetryGroup::new(vec![
        SymmetryTransform::identity(3, 1),
        SymmetryTransform::new("mirror", LinearMap::neg_identity(3), LinearMap::neg_identity(1)),
    ])
    .expect("static group")
}

/// PlanarReach's 4-fold group (the Klein four-group): identity, reflect-x,
/// reflect-y, rotate-180, acting blockwise on `(p, vel, goal)` and on the
/// acceleration command.
pub fn planar_group() -> SymmetryGroup {
    let block = |sx: f64, sy: f64| LinearMap::diag(&[sx, sy, sx, sy, sx, sy]);
    let act = |sx: f64, sy: f64| LinearMap::diag(&[sx, sy]);
    SymmetryGroup::new(vec![
        SymmetryTransform::identity(6, 2),
        SymmetryTransform::new("reflect-x", block(-1.0, 1.0), act(-1.0, 1.0)),
        SymmetryTransform::new("reflect-y", block(1.0, -1.0), act(1.0, -1.0)),
        SymmetryTransform::new("rotate-180", block(-1.0, -1.0), act(-1.0, -1.0)),
    ])
    .expect("static group")
}

/// Wrap an angle into `(-pi, pi]`.
///
/// Sign-symmetric (`wrap(-t) == -wrap(t)`) everywhere except exactly at the
/// branch point, where `-pi` maps to `+pi`.
pub fn wrap_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut t = theta % two_pi;
    if t > PI {
        t -= two_pi;
    } else if t <= -PI {
        t += two_pi;
    }
    t
}

/// Odd sine, bitwise: valid for `|x| <= pi` where `sin(|x|) >= 0`.
#[inline]
pub(crate) fn sin_odd(x: f64) -> f64 {
    x.abs().sin().copysign(x)
}

/// Even cosine, bitwise.
#[inline]
pub(crate) fn cos_even(x: f64) -> f64 {
    x.abs().cos()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_angle_stays_in_range_and_is_odd() {
        for i in -1000..=1000 {
            let t = i as f64 * 0.0173;
            let w = wrap_angle(t);
            assert!(w > -PI && w <= PI, "wrap({t}) = {w}");
            if w != PI {
                assert_eq!(wrap_angle(-t).to_bits(), (-w).to_bits());
            }
        }
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
    }

    #[test]
    fn factory_rejects_unknown_ids() {
        assert!(make_env("cartpole").is_ok());
        assert!(make_env("planar-reach").is_ok());
        assert!(make_env("pendulum").is_err());
    }

    #[test]
    fn builtin_groups_pass_structural_verification() {
        assert!(cartpole_group().verify(1e-12).pass());
        assert!(planar_group().verify(1e-12).pass());
    }

    #[test]
    fn builtin_specs_validate() {
        for id in env_ids() {
            make_env(id).unwrap().spec().validate().unwrap();
        }
    }

    #[test]
    fn signed_permutations_preserve_inf_norm() {
        let g = planar_group();
        let v = [0.3, -2.5, 1.0, 0.0, -0.125, 4.0];
        for t in g.transforms() {
            let tv = t.apply_state(&v).unwrap();
            assert_eq!(crate::numkit::inf_norm(&tv), crate::numkit::inf_norm(&v));
        }
    }
}
