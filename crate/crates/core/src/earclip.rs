//! Ear-clipping triangulation of planar polygons with holes.
//!
//! Polygons are index lists into a shared 2D point array. A point index may
//! occur twice after hole bridging; the containment test ignores repeated
//! occurrences of the ear's own corners.

use log::debug;

use crate::error::{Error, Result};

pub type P2 = [f64; 2];

#[inline]
pub fn orient(a: P2, b: P2, c: P2) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Shoelace area, positive for counter-clockwise order.
pub fn signed_area(pts: &[P2], poly: &[usize]) -> f64 {
    let n = poly.len();
    let mut s = 0.0;
    for i in 0..n {
        let (p, q) = (pts[poly[i]], pts[poly[(i + 1) % n]]);
        s += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * s
}

/// Point-in-polygon by crossing parity; boundary points count as outside or
/// inside arbitrarily.
pub fn point_in_polygon(p: P2, pts: &[P2], poly: &[usize]) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (pts[poly[i]], pts[poly[j]]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// True when the open segments cross at a single interior point.
pub fn segments_cross(p1: P2, p2: P2, p3: P2, p4: P2) -> bool {
    let d1 = orient(p3, p4, p1);
    let d2 = orient(p3, p4, p2);
    let d3 = orient(p1, p2, p3);
    let d4 = orient(p1, p2, p4);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// Inclusive containment; points within rounding distance of an edge count as inside.
fn in_triangle_inclusive(a: P2, b: P2, c: P2, p: P2) -> bool {
    let side = |u: P2, v: P2| {
        let l2 = (v[0] - u[0]).powi(2) + (v[1] - u[1]).powi(2);
        orient(u, v, p) >= -1e-12 * l2
    };
    side(a, b) && side(b, c) && side(c, a)
}

/// Splices each hole into the outer boundary through a bridge to a mutually
/// visible vertex. `outer` must be counter-clockwise and holes clockwise.
pub fn bridge_holes(outer: &[usize], holes: &[Vec<usize>], pts: &[P2]) -> Vec<usize> {
    let mut poly = outer.to_vec();
    let mut order: Vec<usize> = (0..holes.len()).filter(|&h| !holes[h].is_empty()).collect();
    let max_x = |h: &Vec<usize>| h.iter().map(|&i| pts[i][0]).fold(f64::NEG_INFINITY, f64::max);
    order.sort_by(|&x, &y| max_x(&holes[y]).total_cmp(&max_x(&holes[x])));
    for (done, &hi) in order.iter().enumerate() {
        let hole = &holes[hi];
        let k = (0..hole.len()).max_by(|&x, &y| pts[hole[x]][0].total_cmp(&pts[hole[y]][0])).unwrap();
        let h = hole[k];
        let mut cand: Vec<usize> = (0..poly.len()).collect();
        let dist = |i: usize| {
            let p = pts[poly[i]];
            (p[0] - pts[h][0]).powi(2) + (p[1] - pts[h][1]).powi(2)
        };
        cand.sort_by(|&x, &y| dist(x).total_cmp(&dist(y)));
        let blocked = |m: usize| {
            let (pm, ph) = (pts[m], pts[h]);
            let ring_blocks = |ring: &[usize]| {
                (0..ring.len()).any(|e| {
                    let (u, v) = (ring[e], ring[(e + 1) % ring.len()]);
                    u != m && v != m && u != h && v != h && segments_cross(pm, ph, pts[u], pts[v])
                })
            };
            ring_blocks(&poly) || order[done..].iter().any(|&o| ring_blocks(&holes[o]))
        };
        let pick = cand.iter().copied().find(|&i| !blocked(poly[i])).unwrap_or(cand[0]);
        let m = poly[pick];
        let mut spliced = Vec::with_capacity(poly.len() + hole.len() + 2);
        spliced.extend_from_slice(&poly[..=pick]);
        for j in 0..=hole.len() {
            spliced.push(hole[(k + j) % hole.len()]);
        }
        spliced.push(m);
        spliced.extend_from_slice(&poly[pick + 1..]);
        poly = spliced;
    }
    poly
}

/// Ear clipping of a counter-clockwise (possibly bridged) polygon. Always
/// returns `len - 2` triangles; when no valid ear exists the widest convex
/// corner (or any corner) is clipped.
pub fn ear_clip(poly: &[usize], pts: &[P2]) -> Vec<[usize; 3]> {
    let mut ring = poly.to_vec();
    let mut out = Vec::with_capacity(ring.len().saturating_sub(2));
    while ring.len() > 3 {
        let n = ring.len();
        let mut clipped = None;
        for i in 0..n {
            let (a, b, c) = (ring[(i + n - 1) % n], ring[i], ring[(i + 1) % n]);
            if orient(pts[a], pts[b], pts[c]) <= 0.0 {
                continue;
            }
            let blocked = ring.iter().any(|&p| {
                p != a && p != b && p != c && in_triangle_inclusive(pts[a], pts[b], pts[c], pts[p])
            });
            if !blocked {
                clipped = Some(i);
                break;
            }
        }
        let i = clipped.unwrap_or_else(|| {
            debug!("ear clipping fallback on {n}-gon");
            (0..n)
                .max_by(|&x, &y| {
                    let ar = |i: usize| orient(pts[ring[(i + n - 1) % n]], pts[ring[i]], pts[ring[(i + 1) % n]]);
                    ar(x).total_cmp(&ar(y))
                })
                .unwrap()
        });
        out.push([ring[(i + n - 1) % n], ring[i], ring[(i + 1) % n]]);
        ring.remove(i);
    }
    if ring.len() == 3 {
        out.push([ring[0], ring[1], ring[2]]);
    }
    out
}

fn ring_is_simple(pts: &[P2], ring: &[usize], other: &[&[usize]]) -> bool {
    let n = ring.len();
    for i in 0..n {
        let (a, b) = (ring[i], ring[(i + 1) % n]);
        for r in std::iter::once(ring).chain(other.iter().copied()) {
            for j in 0..r.len() {
                let (c, d) = (r[j], r[(j + 1) % r.len()]);
                if [a, b].contains(&c) || [a, b].contains(&d) {
                    continue;
                }
                if segments_cross(pts[a], pts[b], pts[c], pts[d]) {
                    return false;
                }
            }
        }
    }
    true
}

/// Triangulates a simple polygon with holes given as coordinate rings.
/// Returned indices address `outer` followed by each hole in order.
pub fn triangulate_polygon(outer: &[P2], holes: &[Vec<P2>]) -> Result<Vec<[usize; 3]>> {
    if outer.len() < 3 {
        return Err(Error::DegeneratePolygon);
    }
    let mut pts: Vec<P2> = outer.to_vec();
    let mut outer_ring: Vec<usize> = (0..outer.len()).collect();
    let mut hole_rings = Vec::new();
    for h in holes {
        let start = pts.len();
        pts.extend_from_slice(h);
        hole_rings.push((start..pts.len()).collect::<Vec<_>>());
    }
    let others: Vec<&[usize]> = hole_rings.iter().map(|r| r.as_slice()).collect();
    if !ring_is_simple(&pts, &outer_ring, &others) {
        return Err(Error::NotSimple);
    }
    let area = signed_area(&pts, &outer_ring);
    let scale = pts.iter().fold(0.0f64, |m, p| m.max(p[0].abs()).max(p[1].abs())).max(1e-300);
    if area.abs() <= 1e-14 * scale * scale {
        return Err(Error::DegeneratePolygon);
    }
    if area < 0.0 {
        outer_ring.reverse();
    }
    for r in &mut hole_rings {
        if signed_area(&pts, r) > 0.0 {
            r.reverse();
        }
    }
    let poly = bridge_holes(&outer_ring, &hole_rings, &pts);
    Ok(ear_clip(&poly, &pts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tri_area_sum(pts: &[P2], tris: &[[usize; 3]]) -> f64 {
        tris.iter().map(|t| 0.5 * orient(pts[t[0]], pts[t[1]], pts[t[2]])).sum()
    }

    #[test]
    fn square_gives_two_triangles() {
        let sq = [[0., 0.], [1., 0.], [1., 1.], [0., 1.]];
        let t = triangulate_polygon(&sq, &[]).unwrap();
        assert_eq!(t.len(), 2);
        assert!((tri_area_sum(&sq, &t) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn square_with_hole() {
        let outer = [[0., 0.], [4., 0.], [4., 4.], [0., 4.]];
        let hole = vec![[1., 1.], [1., 3.], [3., 3.], [3., 1.]];
        let t = triangulate_polygon(&outer, std::slice::from_ref(&hole)).unwrap();
        // n - 2 + 2h with n = 8 vertices and one hole.
        assert_eq!(t.len(), 8);
        let mut pts = outer.to_vec();
        pts.extend(hole);
        assert!((tri_area_sum(&pts, &t) - 12.0).abs() < 1e-12);
        assert!(t.iter().all(|tr| orient(pts[tr[0]], pts[tr[1]], pts[tr[2]]) > 0.0));
    }

    #[test]
    fn collinear_is_degenerate() {
        assert!(matches!(triangulate_polygon(&[[0., 0.], [1., 0.], [2., 0.]], &[]), Err(Error::DegeneratePolygon)));
    }

    #[test]
    fn bowtie_is_not_simple() {
        let b = [[0., 0.], [1., 1.], [1., 0.], [0., 1.]];
        assert!(matches!(triangulate_polygon(&b, &[]), Err(Error::NotSimple)));
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let l = [[0., 0.], [0., 2.], [1., 2.], [1., 1.], [2., 1.], [2., 0.]];
        let t = triangulate_polygon(&l, &[]).unwrap();
        assert_eq!(t.len(), 4);
        assert!((tri_area_sum(&l, &t) - 3.0).abs() < 1e-12);
    }

    fn star(n: usize, seed: &[f64]) -> Vec<P2> {
        (0..n)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / n as f64;
                let r = 0.3 + seed[i % seed.len()];
                [r * a.cos(), r * a.sin()]
            })
            .collect()
    }

    proptest! {
        #[test]
        fn star_polygons_preserve_area(n in 3usize..40, radii in proptest::collection::vec(0.0f64..1.0, 1..40)) {
            let p = star(n, &radii);
            let idx: Vec<usize> = (0..n).collect();
            let a = signed_area(&p, &idx);
            let t = triangulate_polygon(&p, &[]).unwrap();
            prop_assert_eq!(t.len(), n - 2);
            prop_assert!((tri_area_sum(&p, &t) - a).abs() < 1e-9 * a.abs().max(1.0));
            for tr in &t {
                prop_assert!(orient(p[tr[0]], p[tr[1]], p[tr[2]]) >= 0.0);
            }
        }
    }
}
