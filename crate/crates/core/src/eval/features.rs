use crate::motion::{MotionClip, Vec3};

/// Names of the entries of [`geometric_features`], in order.
pub const FEATURE_NAMES: [&str; 12] = [
    "root_height_mean",
    "root_height_var",
    "hand_height_mean",
    "hand_height_var",
    "foot_height_mean",
    "foot_height_var",
    "head_height_mean",
    "hand_spread_mean",
    "foot_spread_mean",
    "root_speed_mean",
    "joint_speed_mean",
    "joint_speed_var",
];

fn mean_var(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (mean, xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n)
}

/// Fixed-length summary of a clip. Heights in meters, speeds in m/s. Hand and
/// foot statistics pool both sides; joints missing from the skeleton are skipped.
pub fn geometric_features(clip: &MotionClip) -> [f64; 12] {
    let skel = clip.skeleton();
    let idx = |names: &[&str]| names.iter().filter_map(|n| skel.index_of(n)).collect::<Vec<_>>();
    let hands = idx(&["right_hand", "left_hand"]);
    let feet = idx(&["right_foot", "left_foot"]);
    let head = idx(&["head"]);
    let root = skel.root();

    let positions: Vec<Vec<Vec3>> = clip.frames().iter().map(|p| skel.positions(p)).collect();
    let heights = |set: &[usize]| positions.iter().flat_map(|f| set.iter().map(move |&j| f[j].y)).collect::<Vec<_>>();
    let spread = |set: &[usize]| -> Vec<f64> {
        if set.len() < 2 {
            return Vec::new();
        }
        positions.iter().map(|f| (f[set[0]] - f[set[1]]).norm()).collect()
    };

    let fps = clip.fps() as f64;
    let mut root_speed = Vec::new();
    let mut joint_speed = Vec::new();
    for w in positions.windows(2) {
        root_speed.push((w[1][root] - w[0][root]).norm() * fps);
        joint_speed.extend(w[0].iter().zip(&w[1]).map(|(a, b)| (b - a).norm() * fps));
    }

    let (rh, rv) = mean_var(&heights(&[root]));
    let (hh, hv) = mean_var(&heights(&hands));
    let (fh, fv) = mean_var(&heights(&feet));
    let (head_h, _) = mean_var(&heights(&head));
    let (hs, _) = mean_var(&spread(&hands));
    let (fs, _) = mean_var(&spread(&feet));
    let (rs, _) = mean_var(&root_speed);
    let (js, jv) = mean_var(&joint_speed);
    [rh, rv, hh, hv, fh, fv, head_h, hs, fs, rs, js, jv]
}
