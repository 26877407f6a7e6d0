//! Suzuki–Abe border following, target selection and polygon fill.

use alloc::vec;
use alloc::vec::Vec;

use crate::Mask;

/// Closed chain of 8-connected pixel coordinates `(x, y)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Contour {
    pub points: Vec<(usize, usize)>,
}

impl Contour {
    pub fn new(points: Vec<(usize, usize)>) -> Self {
        Contour { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Twice the shoelace area of the closed chain (always non-negative).
    pub fn doubled_area(&self) -> u64 {
        let n = self.points.len();
        let mut sum: i64 = 0;
        for i in 0..n {
            let (x0, y0) = self.points[i];
            let (x1, y1) = self.points[(i + 1) % n];
            sum += x0 as i64 * y1 as i64 - x1 as i64 * y0 as i64;
        }
        sum.unsigned_abs()
    }

    pub fn area(&self) -> f64 {
        self.doubled_area() as f64 / 2.0
    }

    pub fn touches_border(&self, width: usize, height: usize) -> bool {
        self.points
            .iter()
            .any(|&(x, y)| x == 0 || y == 0 || x + 1 == width || y + 1 == height)
    }

    /// Chain pixels as a mask.
    pub fn to_mask(&self, width: usize, height: usize) -> Mask {
        let mut m = Mask::empty(width, height);
        for &(x, y) in &self.points {
            m.set(x, y, true);
        }
        m
    }

    /// Even–odd fill: pixels strictly inside the chain polygon plus the chain.
    ///
    /// Rows are intersected with the chain edges under the half-open rule
    /// (an edge counts on row `y` when exactly one endpoint lies below `y`),
    /// so every crossing lands on a chain vertex.
    pub fn fill(&self, width: usize, height: usize) -> Mask {
        let mut m = self.to_mask(width, height);
        let n = self.points.len();
        if n < 3 {
            return m;
        }
        let mut crossings: Vec<i64> = Vec::new();
        for y in 0..height as i64 {
            crossings.clear();
            for i in 0..n {
                let (x0, y0) = self.points[i];
                let (x1, y1) = self.points[(i + 1) % n];
                let (x0, y0, x1, y1) = (x0 as i64, y0 as i64, x1 as i64, y1 as i64);
                if (y0 > y) != (y1 > y) {
                    // |y1 - y0| == 1 for 8-neighbour steps; general form kept.
                    let num = (y - y0) * (x1 - x0);
                    let den = y1 - y0;
                    crossings.push(x0 + num.div_euclid(den) + i64::from(num.rem_euclid(den) != 0));
                }
            }
            crossings.sort_unstable();
            for pair in crossings.chunks_exact(2) {
                let start = pair[0].max(0);
                let end = pair[1].min(width as i64);
                for x in start..end {
                    m.set(x as usize, y as usize, true);
                }
            }
        }
        m
    }
}

// Counterclockwise as displayed (y grows downwards), starting east.
const DIRS: [(isize, isize); 8] = [
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

fn dir_index(dx: isize, dy: isize) -> usize {
    DIRS.iter()
        .position(|&d| d == (dx, dy))
        .expect("neighbouring pixels")
}

struct Labels {
    data: Vec<i32>,
    stride: usize,
}

impl Labels {
    #[inline]
    fn at(&self, x: isize, y: isize) -> i32 {
        self.data[y as usize * self.stride + x as usize]
    }

    #[inline]
    fn set(&mut self, x: isize, y: isize, v: i32) {
        self.data[y as usize * self.stride + x as usize] = v;
    }
}

/// Follows one border starting at `start`, entering from the zero pixel
/// `from`. Marks visited pixels with `nbd` / `-nbd` and returns the chain in
/// padded coordinates.
fn follow_border(
    labels: &mut Labels,
    start: (isize, isize),
    from: (isize, isize),
    nbd: i32,
) -> Vec<(isize, isize)> {
    let d0 = dir_index(from.0 - start.0, from.1 - start.1);
    let first = (0..8).map(|k| (d0 + 8 - k) % 8).find(|&d| {
        let (dx, dy) = DIRS[d];
        labels.at(start.0 + dx, start.1 + dy) != 0
    });
    let Some(d1) = first else {
        labels.set(start.0, start.1, -nbd);
        return vec![start];
    };
    let p1 = (start.0 + DIRS[d1].0, start.1 + DIRS[d1].1);

    let mut chain = Vec::new();
    let mut prev = p1;
    let mut cur = start;
    loop {
        let d2 = dir_index(prev.0 - cur.0, prev.1 - cur.1);
        let mut east_zero_seen = false;
        let mut next = cur;
        for k in 1..=8 {
            let d = (d2 + k) % 8;
            let q = (cur.0 + DIRS[d].0, cur.1 + DIRS[d].1);
            if labels.at(q.0, q.1) != 0 {
                next = q;
                break;
            }
            if d == 0 {
                east_zero_seen = true;
            }
        }
        if east_zero_seen {
            labels.set(cur.0, cur.1, -nbd);
        } else if labels.at(cur.0, cur.1) == 1 {
            labels.set(cur.0, cur.1, nbd);
        }
        chain.push(cur);
        if next == start && cur == p1 {
            break;
        }
        prev = cur;
        cur = next;
    }
    chain
}

/// Outer borders of all 8-connected foreground components, in raster order of
/// their starting pixel. Hole borders are followed (to label them) but not
/// returned.
pub fn find_contours(m: &Mask) -> Vec<Contour> {
    let (w, h) = m.dims();
    let stride = w + 2;
    let mut labels = Labels {
        data: vec![0; stride * (h + 2)],
        stride,
    };
    for y in 0..h {
        for x in 0..w {
            if m.is_on(x, y) {
                labels.data[(y + 1) * stride + x + 1] = 1;
            }
        }
    }

    let mut nbd = 1;
    let mut out = Vec::new();
    for y in 1..=h as isize {
        for x in 1..=w as isize {
            let v = labels.at(x, y);
            if v == 1 && labels.at(x - 1, y) == 0 {
                nbd += 1;
                let chain = follow_border(&mut labels, (x, y), (x - 1, y), nbd);
                out.push(Contour::new(
                    chain
                        .into_iter()
                        .map(|(px, py)| (px as usize - 1, py as usize - 1))
                        .collect(),
                ));
            } else if v >= 1 && labels.at(x + 1, y) == 0 {
                nbd += 1;
                follow_border(&mut labels, (x, y), (x + 1, y), nbd);
            }
        }
    }
    out
}

/// Largest-area contour that does not touch the frame border.
///
/// Ties go to the contour whose first point is topmost, then leftmost.
pub fn select_target_contour(cs: &[Contour], width: usize, height: usize) -> Option<&Contour> {
    cs.iter()
        .filter(|c| !c.is_empty() && !c.touches_border(width, height))
        .min_by(|a, b| {
            b.doubled_area().cmp(&a.doubled_area()).then_with(|| {
                let (ax, ay) = a.points[0];
                let (bx, by) = b.points[0];
                (ay, ax).cmp(&(by, bx))
            })
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn square_mask(w: usize, h: usize, squares: &[(usize, usize, usize)]) -> Mask {
        Mask::from_fn(w, h, |x, y| {
            squares
                .iter()
                .any(|&(sx, sy, s)| x >= sx && x < sx + s && y >= sy && y < sy + s)
        })
    }

    #[test]
    fn empty_mask_has_no_contours() {
        assert!(find_contours(&Mask::empty(10, 10)).is_empty());
    }

    #[test]
    fn filled_square_border() {
        let m = square_mask(10, 10, &[(3, 3, 4)]);
        let cs = find_contours(&m);
        assert_eq!(cs.len(), 1);
        let pts: BTreeSet<_> = cs[0].points.iter().copied().collect();
        let mut expect = BTreeSet::new();
        for y in 3..7 {
            for x in 3..7 {
                if x == 3 || x == 6 || y == 3 || y == 6 {
                    expect.insert((x, y));
                }
            }
        }
        assert_eq!(cs[0].len(), 12);
        assert_eq!(pts, expect);
        assert_eq!(cs[0].points[0], (3, 3));
        // Shoelace of the 3×3 polygon through the border pixel centres.
        assert_eq!(cs[0].doubled_area(), 18);
    }

    #[test]
    fn two_squares_two_contours() {
        let m = square_mask(20, 12, &[(1, 1, 4), (10, 5, 3)]);
        assert_eq!(find_contours(&m).len(), 2);
    }

    #[test]
    fn ring_yields_single_outer_border() {
        let m = Mask::from_fn(12, 12, |x, y| {
            (2..10).contains(&x)
                && (2..10).contains(&y)
                && !((4..8).contains(&x) && (4..8).contains(&y))
        });
        let cs = find_contours(&m);
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].points[0], (2, 2));
    }

    #[test]
    fn blob_inside_hole_is_its_own_component() {
        let m = Mask::from_fn(14, 14, |x, y| {
            let ring = (1..13).contains(&x)
                && (1..13).contains(&y)
                && !((3..11).contains(&x) && (3..11).contains(&y));
            let inner = (6..8).contains(&x) && (6..8).contains(&y);
            ring || inner
        });
        assert_eq!(find_contours(&m).len(), 2);
    }

    #[test]
    fn single_pixel_and_diagonal_line() {
        let mut m = Mask::empty(6, 6);
        m.set(2, 2, true);
        let cs = find_contours(&m);
        assert_eq!(cs, alloc::vec![Contour::new(alloc::vec![(2, 2)])]);

        let diag = Mask::from_fn(6, 6, |x, y| x == y && (1..=4).contains(&x));
        let cs = find_contours(&diag);
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].doubled_area(), 0);
    }

    #[test]
    fn selection_skips_border_touching() {
        let m = square_mask(20, 20, &[(4, 0, 10), (14, 14, 3)]);
        let cs = find_contours(&m);
        let target = select_target_contour(&cs, 20, 20).unwrap();
        assert_eq!(target.points[0], (14, 14));
    }

    #[test]
    fn selection_prefers_larger_area() {
        let m = square_mask(30, 30, &[(2, 2, 3), (10, 10, 6)]);
        let cs = find_contours(&m);
        let target = select_target_contour(&cs, 30, 30).unwrap();
        // 6×6 square: polygon 5×5 -> doubled area 50; 3×3 square: 2×2 -> 8.
        assert_eq!(target.doubled_area(), 50);
        assert_eq!(target.points[0], (10, 10));
    }

    #[test]
    fn selection_ties_break_topmost_then_leftmost() {
        let m = square_mask(30, 30, &[(15, 5, 4), (3, 5, 4), (3, 2, 1)]);
        let cs = find_contours(&m);
        let target = select_target_contour(&cs, 30, 30).unwrap();
        assert_eq!(target.points[0], (3, 5));
        assert!(select_target_contour(&[], 30, 30).is_none());
    }

    /// Even–odd point-in-polygon by ray casting, per pixel.
    fn brute_fill(c: &Contour, w: usize, h: usize) -> Mask {
        let pts: Vec<(f64, f64)> = c
            .points
            .iter()
            .map(|&(x, y)| (x as f64, y as f64))
            .collect();
        let on_chain: BTreeSet<_> = c.points.iter().copied().collect();
        Mask::from_fn(w, h, |x, y| {
            if on_chain.contains(&(x, y)) {
                return true;
            }
            let (px, py) = (x as f64, y as f64);
            let mut inside = false;
            let n = pts.len();
            let mut j = n - 1;
            for i in 0..n {
                let (xi, yi) = pts[i];
                let (xj, yj) = pts[j];
                if (yi > py) != (yj > py) && px < (xj - xi) * (py - yi) / (yj - yi) + xi {
                    inside = !inside;
                }
                j = i;
            }
            inside
        })
    }

    #[test]
    fn fill_of_square_border_is_the_square() {
        let m = square_mask(10, 10, &[(3, 3, 4)]);
        let cs = find_contours(&m);
        assert_eq!(cs[0].fill(10, 10), m);
    }

    fn arb_mask(w: usize, h: usize) -> impl Strategy<Value = Mask> {
        proptest::collection::vec(prop::bool::weighted(0.55), w * h)
            .prop_map(move |bits| Mask::from_fn(w, h, |x, y| bits[y * w + x]))
    }

    proptest! {
        #[test]
        fn contour_points_are_border_pixels(m in arb_mask(14, 11)) {
            for c in find_contours(&m) {
                let n = c.len();
                for (i, &(x, y)) in c.points.iter().enumerate() {
                    prop_assert!(m.is_on(x, y));
                    let (x, y) = (x as isize, y as isize);
                    let has_bg = [(1, 0), (-1, 0), (0, 1), (0, -1)]
                        .iter()
                        .any(|&(dx, dy)| !m.is_on_signed(x + dx, y + dy));
                    prop_assert!(has_bg);
                    let (nx, ny) = c.points[(i + 1) % n];
                    let (dx, dy) = (nx as isize - x, ny as isize - y);
                    prop_assert!(dx.abs() <= 1 && dy.abs() <= 1);
                }
            }
        }

        #[test]
        fn one_contour_per_component(m in arb_mask(12, 12)) {
            // Flood fill with 8-connectivity as an independent component count.
            let (w, h) = m.dims();
            let mut seen = alloc::vec![false; w * h];
            let mut components = 0;
            for sy in 0..h {
                for sx in 0..w {
                    if !m.is_on(sx, sy) || seen[sy * w + sx] {
                        continue;
                    }
                    components += 1;
                    let mut stack = alloc::vec![(sx, sy)];
                    seen[sy * w + sx] = true;
                    while let Some((x, y)) = stack.pop() {
                        for dy in -1isize..=1 {
                            for dx in -1isize..=1 {
                                let (nx, ny) = (x as isize + dx, y as isize + dy);
                                if m.is_on_signed(nx, ny) && !seen[ny as usize * w + nx as usize] {
                                    seen[ny as usize * w + nx as usize] = true;
                                    stack.push((nx as usize, ny as usize));
                                }
                            }
                        }
                    }
                }
            }
            prop_assert_eq!(find_contours(&m).len(), components);
        }

        #[test]
        fn scanline_fill_matches_ray_casting(m in arb_mask(16, 13)) {
            for c in find_contours(&m) {
                prop_assert_eq!(c.fill(16, 13), brute_fill(&c, 16, 13));
            }
        }
    }
}
