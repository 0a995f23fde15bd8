//! Wavefront OBJ output.

use std::fmt::Write as _;

use refractor_core::Vector;

use crate::format::fmt17;

/// Radial mesh `ρ(x_j)·x_j` over triangulated nodes. Nodes with a non-finite
/// or nonpositive radius are dropped together with their triangles.
pub fn radial_obj(nodes: &[Vector<3>], rho: &[f64], triangles: &[[usize; 3]], comment: &str) -> String {
    let mut index = vec![0usize; nodes.len()];
    let mut kept = 0;
    let mut out = String::new();
    let _ = writeln!(out, "# {comment}");
    let mut body = String::new();
    for (j, (x, &r)) in nodes.iter().zip(rho).enumerate() {
        if r.is_finite() && r > 0.0 {
            kept += 1;
            index[j] = kept;
            let p = *x * r;
            let _ = writeln!(body, "v {} {} {}", fmt17(p[0]), fmt17(p[1]), fmt17(p[2]));
        }
    }
    let mut faces = 0;
    for t in triangles {
        let [a, b, c] = t.map(|k| index[k]);
        if a > 0 && b > 0 && c > 0 {
            faces += 1;
            let _ = writeln!(body, "f {a} {b} {c}");
        }
    }
    let _ = writeln!(out, "# {kept} vertices, {faces} faces");
    out.push_str(&body);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drops_undefined_vertices_and_their_faces() {
        let nodes = [
            Vector::new([1.0, 0.0, 0.0]),
            Vector::new([0.0, 1.0, 0.0]),
            Vector::new([0.0, 0.0, 1.0]),
            Vector::new([1.0, 1.0, 1.0]),
        ];
        let obj = radial_obj(&nodes, &[1.0, 2.0, f64::INFINITY, 0.5], &[[0, 1, 2], [0, 1, 3]], "t");
        let lines: Vec<&str> = obj.lines().collect();
        assert_eq!(lines[1], "# 3 vertices, 1 faces");
        assert_eq!(lines.iter().filter(|l| l.starts_with("v ")).count(), 3);
        assert_eq!(*lines.last().unwrap(), "f 1 2 3");
        assert!(lines[3].starts_with("v 0.0000000000000000e0 2.0000000000000000e0"));
    }
}
