//! Damped least-squares inverse kinematics over a fixed joint chain.

use nalgebra::{Matrix3, OMatrix, Dyn, U3};
use serde::{Deserialize, Serialize};

use crate::motion::{Pose, Quat, Skeleton, Vec3, WorldPose};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IkConfig {
    pub damping: f64,
    pub max_iterations: usize,
    /// Residual (meters) below which a target counts as reached.
    pub tolerance: f64,
    /// Longest error vector fed to one update, meters.
    pub max_step: f64,
}

impl Default for IkConfig {
    fn default() -> Self {
        Self { damping: 0.1, max_iterations: 200, tolerance: 1e-3, max_step: 0.15 }
    }
}

/// One block of degrees of freedom the solver may change.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainDof {
    /// Three rotational DOFs of a joint's local rotation.
    Rotation(usize),
    /// Three translational DOFs of the root.
    RootTranslation,
}

#[derive(Debug, Clone)]
pub struct IkOutcome {
    pub pose: Pose,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Moves `effector` towards `target` by changing only the DOFs in `chain`.
pub fn solve_ik(
    skeleton: &Skeleton,
    pose: &Pose,
    effector: usize,
    chain: &[ChainDof],
    target: Vec3,
    config: &IkConfig,
) -> IkOutcome {
    let mut pose = pose.clone();
    let cols = 3 * chain.len();
    // Stop well inside the tolerance; the last few iterations are cheap.
    let precision = config.tolerance * 1e-2;
    let mut world = WorldPose::compute(skeleton, &pose);
    let mut residual = (target - world.positions[effector]).norm();
    let mut iterations = 0;
    while iterations < config.max_iterations && residual > precision {
        iterations += 1;
        let p_eff = world.positions[effector];
        let mut err = target - p_eff;
        if err.norm() > config.max_step {
            err *= config.max_step / err.norm();
        }

        let mut jac = OMatrix::<f64, U3, Dyn>::zeros(cols);
        for (k, dof) in chain.iter().enumerate() {
            for a in 0..3 {
                let e = Vec3::ith(a, 1.0);
                let col = match *dof {
                    ChainDof::Rotation(j) => e.cross(&(p_eff - world.positions[j])),
                    ChainDof::RootTranslation => e,
                };
                jac.set_column(3 * k + a, &col);
            }
        }
        let lambda2 = config.damping * config.damping;
        let jjt: Matrix3<f64> = &jac * jac.transpose() + Matrix3::identity() * lambda2;
        let Some(y) = jjt.lu().solve(&err) else { break };
        let delta = jac.transpose() * y;

        for (k, dof) in chain.iter().enumerate() {
            let d = Vec3::new(delta[3 * k], delta[3 * k + 1], delta[3 * k + 2]);
            match *dof {
                ChainDof::Rotation(j) => {
                    let parent = skeleton.parent(j).map_or(Quat::identity(), |p| world.rotations[p]);
                    let world_delta = Quat::from_scaled_axis(d);
                    let local = pose.rotation(j);
                    pose.set_rotation(j, parent.inverse() * world_delta * parent * local);
                }
                ChainDof::RootTranslation => pose.root_translation += d,
            }
        }
        world = WorldPose::compute(skeleton, &pose);
        residual = (target - world.positions[effector]).norm();
    }
    IkOutcome { pose, residual, iterations, converged: residual <= config.tolerance }
}
