//! BVH export. Rotation channels are written in ZXY order, degrees; offsets
//! and root translation in meters.

use std::fmt::Write;

use nalgebra::Rotation3;

use super::{MotionClip, Quat, Skeleton, Vec3};

/// Angles `(z, x, y)` in radians with `q = Rz(z) * Rx(x) * Ry(y)`.
pub fn euler_zxy_from_quat(q: &Quat) -> (f64, f64, f64) {
    let m = q.to_rotation_matrix();
    let m = m.matrix();
    let sx = m[(2, 1)].clamp(-1.0, 1.0);
    let x = sx.asin();
    if sx.abs() < 1.0 - 1e-12 {
        let z = (-m[(0, 1)]).atan2(m[(1, 1)]);
        let y = (-m[(2, 0)]).atan2(m[(2, 2)]);
        (z, x, y)
    } else {
        // gimbal lock: fold everything into z
        (m[(1, 0)].atan2(m[(0, 0)]), x, 0.0)
    }
}

pub fn quat_from_euler_zxy(z: f64, x: f64, y: f64) -> Quat {
    let r = Rotation3::from_axis_angle(&Vec3::z_axis(), z)
        * Rotation3::from_axis_angle(&Vec3::x_axis(), x)
        * Rotation3::from_axis_angle(&Vec3::y_axis(), y);
    Quat::from_rotation_matrix(&r)
}

fn num(v: f64) -> String {
    let s = format!("{v:.6}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        "0.000000".to_string()
    } else {
        s
    }
}

fn write_joint(out: &mut String, skel: &Skeleton, index: usize, depth: usize) {
    let pad = "  ".repeat(depth);
    let spec = skel.joint(index);
    let o = if skel.parent(index).is_none() { Vec3::zeros() } else { spec.offset };
    if skel.parent(index).is_none() {
        let _ = writeln!(out, "{pad}ROOT {}", spec.name);
    } else {
        let _ = writeln!(out, "{pad}JOINT {}", spec.name);
    }
    let _ = writeln!(out, "{pad}{{");
    let _ = writeln!(out, "{pad}  OFFSET {} {} {}", num(o.x), num(o.y), num(o.z));
    if skel.parent(index).is_none() {
        let _ = writeln!(out, "{pad}  CHANNELS 6 Xposition Yposition Zposition Zrotation Xrotation Yrotation");
    } else {
        let _ = writeln!(out, "{pad}  CHANNELS 3 Zrotation Xrotation Yrotation");
    }
    let children: Vec<_> = skel.children(index).collect();
    if children.is_empty() {
        let _ = writeln!(out, "{pad}  End Site");
        let _ = writeln!(out, "{pad}  {{");
        let _ = writeln!(out, "{pad}    OFFSET 0.000000 0.000000 0.000000");
        let _ = writeln!(out, "{pad}  }}");
    }
    for c in children {
        write_joint(out, skel, c, depth + 1);
    }
    let _ = writeln!(out, "{pad}}}");
}

/// Depth-first joint order used for both HIERARCHY and MOTION rows.
fn dfs_order(skel: &Skeleton, index: usize, out: &mut Vec<usize>) {
    out.push(index);
    for c in skel.children(index) {
        dfs_order(skel, c, out);
    }
}

pub fn export_bvh(clip: &MotionClip) -> Vec<u8> {
    let skel = clip.skeleton();
    let mut out = String::from("HIERARCHY\n");
    write_joint(&mut out, skel, skel.root(), 0);
    let mut order = Vec::new();
    dfs_order(skel, skel.root(), &mut order);

    let _ = writeln!(out, "MOTION");
    let _ = writeln!(out, "Frames: {}", clip.len());
    let _ = writeln!(out, "Frame Time: {:.8}", 1.0 / clip.fps() as f64);
    for pose in clip.frames() {
        let mut row: Vec<String> = Vec::with_capacity(3 + 3 * order.len());
        let t = pose.root_translation;
        row.extend([num(t.x), num(t.y), num(t.z)]);
        for &j in &order {
            let (z, x, y) = euler_zxy_from_quat(&pose.rotation(j));
            row.extend([num(z.to_degrees()), num(x.to_degrees()), num(y.to_degrees())]);
        }
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out.into_bytes()
}
