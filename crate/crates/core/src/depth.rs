//! Depth-mask encoding: palm gravity center via an exact Euclidean distance
//! transform, the elbow-to-palm baseline, prospect-region segmentation and
//! the scale-invariant keypoint frame encoding.

use crate::hand::{angle_set, HandError, HandFrame, KeypointId, Vec3, KEYPOINT_COUNT};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DepthError {
    #[error("mask has no foreground cells")]
    EmptyMask,
    #[error("mask dimensions {width}x{height} do not match {cells} cells")]
    BadDimensions {
        width: usize,
        height: usize,
        cells: usize,
    },
    #[error("baseline endpoints coincide")]
    ZeroBaseline,
    #[error("degenerate geometry while encoding: {0}")]
    Geometry(#[from] HandError),
}

/// A depth image. A zero cell is background; any nonzero gray level is
/// foreground, the value doubling as a depth reading. The image border
/// always counts as background.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMask {
    width: usize,
    height: usize,
    cells: Vec<u16>,
}

impl DepthMask {
    pub fn new(width: usize, height: usize, cells: Vec<u16>) -> Result<DepthMask, DepthError> {
        if width == 0 || height == 0 || cells.len() != width * height {
            return Err(DepthError::BadDimensions {
                width,
                height,
                cells: cells.len(),
            });
        }
        Ok(DepthMask {
            width,
            height,
            cells,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cells(&self) -> &[u16] {
        &self.cells
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> u16 {
        self.cells[y * self.width + x]
    }

    pub fn is_foreground(&self, x: usize, y: usize) -> bool {
        self.at(x, y) != 0
    }

    /// A mask whose foreground is a single gray level carries no usable
    /// depth information.
    pub fn has_depth(&self) -> bool {
        let mut first = None;
        for &v in &self.cells {
            if v == 0 {
                continue;
            }
            match first {
                None => first = Some(v),
                Some(f) if f != v => return true,
                Some(_) => {}
            }
        }
        false
    }
}

/// Squared Euclidean distance from every cell to the nearest background
/// cell, the border ring included. Exact (integer squared distances carried
/// in f64), computed with the two-pass parabola-envelope transform.
pub fn squared_distance_to_background(mask: &DepthMask) -> Vec<f64> {
    const INF: f64 = f64::INFINITY;
    let (w, h) = (mask.width + 2, mask.height + 2);
    // Padded indicator: 0 at background (ring included), INF at foreground.
    let mut grid = vec![0.0_f64; w * h];
    for y in 0..mask.height {
        for x in 0..mask.width {
            if mask.is_foreground(x, y) {
                grid[(y + 1) * w + (x + 1)] = INF;
            }
        }
    }

    let mut column = vec![0.0; h];
    let mut out_col = vec![0.0; h];
    for x in 0..w {
        for y in 0..h {
            column[y] = grid[y * w + x];
        }
        distance_transform_1d(&column, &mut out_col);
        for y in 0..h {
            grid[y * w + x] = out_col[y];
        }
    }
    let mut row = vec![0.0; w];
    let mut out_row = vec![0.0; w];
    let mut result = vec![0.0; mask.width * mask.height];
    for y in 0..h {
        row.copy_from_slice(&grid[y * w..(y + 1) * w]);
        distance_transform_1d(&row, &mut out_row);
        if (1..=mask.height).contains(&y) {
            let dst = &mut result[(y - 1) * mask.width..y * mask.width];
            dst.copy_from_slice(&out_row[1..=mask.width]);
        }
    }
    result
}

/// One-dimensional squared distance transform: out[p] = min_q (p-q)^2 + f[q].
fn distance_transform_1d(f: &[f64], out: &mut [f64]) {
    let n = f.len();
    let mut v = vec![0usize; n]; // parabola sites
    let mut z = vec![0.0f64; n + 1]; // envelope boundaries
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        if f[q].is_infinite() {
            continue;
        }
        loop {
            let p = v[k];
            let s = if f[p].is_infinite() {
                f64::NEG_INFINITY
            } else {
                ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q - p) as f64)
            };
            if s <= z[k] {
                if k == 0 {
                    v[0] = q;
                    z[0] = f64::NEG_INFINITY;
                    z[1] = f64::INFINITY;
                    break;
                }
                k -= 1;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = f64::INFINITY;
                break;
            }
        }
    }
    let mut k = 0usize;
    for p in 0..n {
        while z[k + 1] < p as f64 {
            k += 1;
        }
        let q = v[k];
        out[p] = if f[q].is_infinite() {
            f64::INFINITY
        } else {
            let d = p as f64 - q as f64;
            d * d + f[q]
        };
    }
}

/// The palm gravity center: the foreground cell maximizing its minimum
/// Euclidean distance to the background. Ties break toward the smallest
/// row-major index. Returns (x, y).
pub fn gravity_center(mask: &DepthMask) -> Result<(usize, usize), DepthError> {
    let dist = squared_distance_to_background(mask);
    let mut best: Option<((usize, usize), f64)> = None;
    for y in 0..mask.height {
        for x in 0..mask.width {
            if !mask.is_foreground(x, y) {
                continue;
            }
            let d = dist[y * mask.width + x];
            match best {
                Some((_, bd)) if bd >= d => {}
                _ => best = Some(((x, y), d)),
            }
        }
    }
    best.map(|(p, _)| p).ok_or(DepthError::EmptyMask)
}

/// Elbow-to-palm reference: the unit for every normalized distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Baseline {
    pub center: [f64; 2],
    pub length: f64,
}

pub fn baseline_from(center: [f64; 2], elbow: [f64; 2]) -> Result<Baseline, DepthError> {
    let length = ((center[0] - elbow[0]).powi(2) + (center[1] - elbow[1]).powi(2)).sqrt();
    if length <= 1e-12 {
        return Err(DepthError::ZeroBaseline);
    }
    Ok(Baseline { center, length })
}

/// Observability weight of a keypoint at Euclidean pixel distance `d_euc`
/// from its prospect region: 1 - d/(4*baseline), clamped into [0, 1].
pub fn keypoint_confidence(d_euc: f64, baseline: &Baseline) -> f64 {
    (1.0 - d_euc / (4.0 * baseline.length)).clamp(0.0, 1.0)
}

/// A thresholded, 4-connected foreground component.
#[derive(Debug, Clone, PartialEq)]
pub struct ProspectRegion {
    pub cells: Vec<(usize, usize)>,
    pub centroid: [f64; 2],
    /// Depth reading at the centroid; `None` when the mask carries no depth.
    pub centroid_depth: Option<f64>,
    pub class_hint: Option<KeypointId>,
}

/// Thresholds the depth map and extracts 4-connected components of cells at
/// or above `depth_threshold`, with per-component centroids. Components are
/// ordered by their first cell in row-major order.
pub fn segment_prospects(mask: &DepthMask, depth_threshold: u16) -> Vec<ProspectRegion> {
    let has_depth = mask.has_depth();
    let (w, h) = (mask.width, mask.height);
    let pass = |x: usize, y: usize| mask.at(x, y) != 0 && mask.at(x, y) >= depth_threshold;
    let mut visited = vec![false; w * h];
    let mut regions = Vec::new();
    let mut queue = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if visited[y * w + x] || !pass(x, y) {
                continue;
            }
            let mut cells = Vec::new();
            queue.clear();
            queue.push((x, y));
            visited[y * w + x] = true;
            while let Some((cx, cy)) = queue.pop() {
                cells.push((cx, cy));
                let mut push = |nx: usize, ny: usize, visited: &mut Vec<bool>| {
                    if !visited[ny * w + nx] && pass(nx, ny) {
                        visited[ny * w + nx] = true;
                        queue.push((nx, ny));
                    }
                };
                if cx > 0 {
                    push(cx - 1, cy, &mut visited);
                }
                if cx + 1 < w {
                    push(cx + 1, cy, &mut visited);
                }
                if cy > 0 {
                    push(cx, cy - 1, &mut visited);
                }
                if cy + 1 < h {
                    push(cx, cy + 1, &mut visited);
                }
            }
            let n = cells.len() as f64;
            let sx: f64 = cells.iter().map(|&(cx, _)| cx as f64).sum();
            let sy: f64 = cells.iter().map(|&(_, cy)| cy as f64).sum();
            let centroid = [sx / n, sy / n];
            let centroid_depth = if has_depth {
                let px = centroid[0].round() as usize;
                let py = centroid[1].round() as usize;
                let at_centroid = if px < w && py < h && pass(px, py) {
                    Some(mask.at(px, py) as f64)
                } else {
                    None
                };
                Some(at_centroid.unwrap_or_else(|| {
                    cells
                        .iter()
                        .map(|&(cx, cy)| mask.at(cx, cy) as f64)
                        .sum::<f64>()
                        / n
                }))
            } else {
                None
            };
            regions.push(ProspectRegion {
                cells,
                centroid,
                centroid_depth,
                class_hint: None,
            });
        }
    }
    regions
}

/// Places the 20 reference keypoint positions in pixel space: the pose's
/// relative vectors are scaled by the baseline length and anchored so the
/// pose's own palm reference lands on the detected gravity center.
pub fn fit_skeleton(
    pose: &HandFrame,
    baseline: &Baseline,
    palm_reference: [f64; 2],
) -> [[f64; 2]; KEYPOINT_COUNT] {
    let mut out = [[0.0; 2]; KEYPOINT_COUNT];
    for kp in KeypointId::all() {
        let v = pose.vector(kp).unwrap_or(Vec3::ZERO);
        out[kp.ordinal()] = [
            baseline.center[0] + baseline.length * (v.x - palm_reference[0]),
            baseline.center[1] + baseline.length * (v.y - palm_reference[1]),
        ];
    }
    out
}

/// Matches prospect regions to skeleton keypoints (greedy nearest pair,
/// each used once) and encodes a hand frame. Matched keypoints take the
/// region centroid with confidence 1; the rest take the skeleton position
/// with confidence 0. Positions are stored relative to the gravity center
/// in baseline units.
pub fn encode_frame(
    regions: &[ProspectRegion],
    baseline: &Baseline,
    skeleton: &[[f64; 2]; KEYPOINT_COUNT],
    timestamp: u64,
) -> Result<HandFrame, DepthError> {
    // Greedy assignment by ascending centroid-to-keypoint distance.
    let mut pairs = Vec::with_capacity(regions.len() * KEYPOINT_COUNT);
    for (ri, region) in regions.iter().enumerate() {
        for (ki, kp) in skeleton.iter().enumerate() {
            let d2 = (region.centroid[0] - kp[0]).powi(2) + (region.centroid[1] - kp[1]).powi(2);
            pairs.push((d2, ri, ki));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut region_used = vec![false; regions.len()];
    let mut assigned: [Option<usize>; KEYPOINT_COUNT] = [None; KEYPOINT_COUNT];
    for (_, ri, ki) in pairs {
        if region_used[ri] || assigned[ki].is_some() {
            continue;
        }
        region_used[ri] = true;
        assigned[ki] = Some(ri);
    }

    let normalize = |p: [f64; 2], depth: Option<f64>| {
        Vec3::new(
            (p[0] - baseline.center[0]) / baseline.length,
            (p[1] - baseline.center[1]) / baseline.length,
            depth.map_or(0.0, |d| d / baseline.length),
        )
    };

    let mut positions = [Vec3::ZERO; KEYPOINT_COUNT];
    let mut confidence = [0.0; KEYPOINT_COUNT];
    for kp in KeypointId::all() {
        let ord = kp.ordinal();
        match assigned[ord] {
            Some(ri) => {
                let region = &regions[ri];
                positions[ord] = normalize(region.centroid, region.centroid_depth);
                // The keypoint lies on its region: zero distance.
                confidence[ord] = keypoint_confidence(0.0, baseline);
            }
            None => {
                positions[ord] = normalize(skeleton[ord], None);
                confidence[ord] = 0.0;
            }
        }
    }

    let angles = angle_set(&positions)?;
    let mut vectors = [Vec3::ZERO; crate::hand::VECTOR_KEYPOINT_COUNT];
    vectors.copy_from_slice(&positions[..crate::hand::VECTOR_KEYPOINT_COUNT]);
    Ok(HandFrame::new(vectors, angles, confidence, timestamp)?)
}

/// Rasterizes a hand layout into a synthetic depth mask: one disk per
/// keypoint (each at its own depth reading) plus a larger palm disk.
/// Keypoints listed in `omit` are left out, simulating occlusion.
#[allow(clippy::too_many_arguments)]
pub fn rasterize_hand(
    skeleton: &[[f64; 2]; KEYPOINT_COUNT],
    palm_center: [f64; 2],
    width: usize,
    height: usize,
    keypoint_radius: f64,
    palm_radius: f64,
    keypoint_depths: &[u16; KEYPOINT_COUNT],
    palm_depth: u16,
    omit: &[KeypointId],
) -> DepthMask {
    let mut cells = vec![0u16; width * height];
    let stamp = |cx: f64, cy: f64, r: f64, depth: u16, cells: &mut Vec<u16>| {
        let x0 = (cx - r).floor().max(0.0) as usize;
        let x1 = ((cx + r).ceil() as usize).min(width.saturating_sub(1));
        let y0 = (cy - r).floor().max(0.0) as usize;
        let y1 = ((cy + r).ceil() as usize).min(height.saturating_sub(1));
        for y in y0..=y1 {
            for x in x0..=x1 {
                let d2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
                if d2 <= r * r {
                    let cell = &mut cells[y * width + x];
                    *cell = (*cell).max(depth);
                }
            }
        }
    };
    stamp(
        palm_center[0],
        palm_center[1],
        palm_radius,
        palm_depth,
        &mut cells,
    );
    for kp in KeypointId::all() {
        if omit.contains(&kp) {
            continue;
        }
        let [x, y] = skeleton[kp.ordinal()];
        stamp(
            x,
            y,
            keypoint_radius,
            keypoint_depths[kp.ordinal()],
            &mut cells,
        );
    }
    DepthMask::new(width, height, cells).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// O(P*Q) oracle: for each foreground cell, scan every background cell
    /// plus the virtual border ring.
    fn brute_force_center(mask: &DepthMask) -> Option<(usize, usize)> {
        let (w, h) = (mask.width(), mask.height());
        let mut best: Option<((usize, usize), i64)> = None;
        for y in 0..h {
            for x in 0..w {
                if !mask.is_foreground(x, y) {
                    continue;
                }
                let mut min_d2 = i64::MAX;
                // Interior background cells.
                for qy in 0..h {
                    for qx in 0..w {
                        if mask.is_foreground(qx, qy) {
                            continue;
                        }
                        let d2 = (x as i64 - qx as i64).pow(2) + (y as i64 - qy as i64).pow(2);
                        min_d2 = min_d2.min(d2);
                    }
                }
                // Border ring one cell outside the image.
                for qx in -1..=(w as i64) {
                    for qy in [-1i64, h as i64] {
                        let d2 = (x as i64 - qx).pow(2) + (y as i64 - qy).pow(2);
                        min_d2 = min_d2.min(d2);
                    }
                }
                for qy in -1..=(h as i64) {
                    for qx in [-1i64, w as i64] {
                        let d2 = (x as i64 - qx).pow(2) + (y as i64 - qy).pow(2);
                        min_d2 = min_d2.min(d2);
                    }
                }
                match best {
                    Some((_, bd)) if bd >= min_d2 => {}
                    _ => best = Some(((x, y), min_d2)),
                }
            }
        }
        best.map(|(p, _)| p)
    }

    fn square_mask(size: usize, fg0: usize, fg1: usize) -> DepthMask {
        let mut cells = vec![0u16; size * size];
        for y in fg0..=fg1 {
            for x in fg0..=fg1 {
                cells[y * size + x] = 255;
            }
        }
        DepthMask::new(size, size, cells).unwrap()
    }

    #[test]
    fn gravity_center_of_centered_square() {
        let mask = square_mask(7, 1, 5);
        assert_eq!(gravity_center(&mask).unwrap(), (3, 3));
        assert_eq!(brute_force_center(&mask).unwrap(), (3, 3));
    }

    #[test]
    fn gravity_center_single_pixel() {
        let mut cells = vec![0u16; 8 * 8];
        cells[5 * 8 + 2] = 7;
        let mask = DepthMask::new(8, 8, cells).unwrap();
        assert_eq!(gravity_center(&mask).unwrap(), (2, 5));
    }

    #[test]
    fn gravity_center_of_disk() {
        let size = 33;
        let mut cells = vec![0u16; size * size];
        for y in 0..size {
            for x in 0..size {
                if (x as f64 - 16.0).powi(2) + (y as f64 - 16.0).powi(2) <= 100.0 {
                    cells[y * size + x] = 200;
                }
            }
        }
        let mask = DepthMask::new(size, size, cells).unwrap();
        let got = gravity_center(&mask).unwrap();
        assert_eq!(got, brute_force_center(&mask).unwrap());
        assert_eq!(got, (16, 16));
    }

    #[test]
    fn gravity_center_matches_brute_force_on_random_masks() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..12 {
            let (w, h) = (64, 64);
            let mut cells = vec![0u16; w * h];
            for _ in 0..rng.random_range(1..6) {
                let cx = rng.random_range(5..(w - 5)) as f64;
                let cy = rng.random_range(5..(h - 5)) as f64;
                let r = rng.random_range(2.0..14.0);
                for y in 0..h {
                    for x in 0..w {
                        if (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2) <= r * r {
                            cells[y * w + x] = 100;
                        }
                    }
                }
            }
            let mask = match DepthMask::new(w, h, cells) {
                Ok(m) if m.cells().iter().any(|&c| c != 0) => m,
                _ => continue,
            };
            assert_eq!(
                gravity_center(&mask).unwrap(),
                brute_force_center(&mask).unwrap()
            );
        }
    }

    #[test]
    fn distance_transform_matches_brute_force_on_adversarial_masks() {
        // Squared distances per cell, not just the argmax: thin diagonals,
        // one-pixel holes, almost-full and almost-empty grids, tiny dims.
        let brute = |mask: &DepthMask| -> Vec<f64> {
            let (w, h) = (mask.width(), mask.height());
            let mut out = vec![0.0; w * h];
            for y in 0..h {
                for x in 0..w {
                    if !mask.is_foreground(x, y) {
                        continue;
                    }
                    let mut min_d2 = i64::MAX;
                    for qy in -1..=(h as i64) {
                        for qx in -1..=(w as i64) {
                            let inside = qx >= 0 && qx < w as i64 && qy >= 0 && qy < h as i64;
                            let background =
                                !inside || !mask.is_foreground(qx as usize, qy as usize);
                            if background {
                                min_d2 =
                                    min_d2.min((x as i64 - qx).pow(2) + (y as i64 - qy).pow(2));
                            }
                        }
                    }
                    out[y * w + x] = min_d2 as f64;
                }
            }
            out
        };

        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut masks: Vec<DepthMask> = Vec::new();
        // Thin diagonal.
        let mut cells = vec![0u16; 16 * 16];
        for i in 0..16 {
            cells[i * 16 + i] = 9;
        }
        masks.push(DepthMask::new(16, 16, cells).unwrap());
        // Full foreground with a single interior hole.
        let mut cells = vec![5u16; 12 * 12];
        cells[7 * 12 + 4] = 0;
        masks.push(DepthMask::new(12, 12, cells).unwrap());
        // Entirely foreground: only the border ring bounds the distances.
        masks.push(DepthMask::new(9, 5, vec![3; 45]).unwrap());
        // One-cell strips.
        masks.push(DepthMask::new(1, 7, vec![1, 0, 1, 1, 1, 0, 1]).unwrap());
        masks.push(DepthMask::new(7, 1, vec![1, 1, 0, 0, 1, 1, 1]).unwrap());
        masks.push(DepthMask::new(1, 1, vec![8]).unwrap());
        // Random speckle at several densities and shapes.
        for _ in 0..40 {
            let w = rng.random_range(1..=17);
            let h = rng.random_range(1..=17);
            let density = rng.random_range(5..95);
            let cells: Vec<u16> = (0..w * h)
                .map(|_| {
                    if rng.random_range(0..100) < density {
                        7
                    } else {
                        0
                    }
                })
                .collect();
            masks.push(DepthMask::new(w, h, cells).unwrap());
        }
        for (i, mask) in masks.iter().enumerate() {
            let fast = squared_distance_to_background(mask);
            let slow = brute(mask);
            assert_eq!(fast.len(), slow.len());
            for (j, (a, b)) in fast.iter().zip(&slow).enumerate() {
                if mask.is_foreground(j % mask.width(), j / mask.width()) {
                    assert_eq!(a, b, "mask {i} cell {j}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn gravity_center_rejects_empty_mask() {
        let mask = DepthMask::new(4, 4, vec![0; 16]).unwrap();
        assert_eq!(gravity_center(&mask), Err(DepthError::EmptyMask));
    }

    #[test]
    fn baseline_345_triangle() {
        let b = baseline_from([3.0, 4.0], [0.0, 0.0]).unwrap();
        assert_eq!(b.length, 5.0);
        let b = baseline_from([7.5, 2.0], [0.5, 2.0]).unwrap();
        assert_eq!(b.length, 7.0);
        assert_eq!(
            baseline_from([1.0, 1.0], [1.0, 1.0]),
            Err(DepthError::ZeroBaseline)
        );
    }

    #[test]
    fn baseline_matches_direct_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let c: [f64; 2] = [rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0)];
            let e: [f64; 2] = [rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0)];
            let expect = ((c[0] - e[0]).powi(2) + (c[1] - e[1]).powi(2)).sqrt();
            if expect <= 1e-12 {
                continue;
            }
            let b = baseline_from(c, e).unwrap();
            assert!((b.length - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn confidence_formula_spot_checks() {
        let b = baseline_from([10.0, 0.0], [0.0, 0.0]).unwrap();
        assert!((keypoint_confidence(0.0, &b) - 1.0).abs() < 1e-12);
        assert!((keypoint_confidence(4.0 * b.length, &b) - 0.0).abs() < 1e-12);
        assert!((keypoint_confidence(2.0 * b.length, &b) - 0.5).abs() < 1e-12);
        // Clamped and monotone non-increasing.
        assert_eq!(keypoint_confidence(1e9, &b), 0.0);
        let mut prev = 1.0;
        for i in 0..100 {
            let c = keypoint_confidence(i as f64, &b);
            assert!((0.0..=1.0).contains(&c));
            assert!(c <= prev);
            prev = c;
        }
    }

    #[test]
    fn segment_finds_two_blobs() {
        let mut cells = vec![0u16; 12 * 12];
        for y in 1..4 {
            for x in 1..4 {
                cells[y * 12 + x] = 200;
            }
        }
        for y in 7..10 {
            for x in 8..11 {
                cells[y * 12 + x] = 210;
            }
        }
        let mask = DepthMask::new(12, 12, cells).unwrap();
        let regions = segment_prospects(&mask, 100);
        assert_eq!(regions.len(), 2);
        assert_eq!(regions[0].centroid, [2.0, 2.0]);
        assert_eq!(regions[1].centroid, [9.0, 8.0]);
        assert_eq!(regions[0].cells.len(), 9);
        // Threshold above every value: nothing survives.
        assert!(segment_prospects(&mask, 240).is_empty());
    }

    #[test]
    fn segment_component_count_matches_flood_fill_oracle() {
        // Independent oracle: label classically with a recursive DFS.
        fn oracle_count(mask: &DepthMask, threshold: u16) -> usize {
            let (w, h) = (mask.width(), mask.height());
            let mut label = vec![0usize; w * h];
            let mut next = 0usize;
            fn fill(
                mask: &DepthMask,
                label: &mut [usize],
                x: usize,
                y: usize,
                id: usize,
                threshold: u16,
            ) {
                let w = mask.width();
                if label[y * w + x] != 0 || mask.at(x, y) < threshold || mask.at(x, y) == 0 {
                    return;
                }
                label[y * w + x] = id;
                if x > 0 {
                    fill(mask, label, x - 1, y, id, threshold);
                }
                if x + 1 < w {
                    fill(mask, label, x + 1, y, id, threshold);
                }
                if y > 0 {
                    fill(mask, label, x, y - 1, id, threshold);
                }
                if y + 1 < mask.height() {
                    fill(mask, label, x, y + 1, id, threshold);
                }
            }
            for y in 0..h {
                for x in 0..w {
                    if label[y * w + x] == 0 && mask.at(x, y) >= threshold && mask.at(x, y) != 0 {
                        next += 1;
                        fill(mask, &mut label, x, y, next, threshold);
                    }
                }
            }
            next
        }

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let (w, h) = (32, 32);
            let mut cells = vec![0u16; w * h];
            for c in cells.iter_mut() {
                if rng.random_range(0..100) < 30 {
                    *c = rng.random_range(50..255);
                }
            }
            let mask = DepthMask::new(w, h, cells).unwrap();
            let regions = segment_prospects(&mask, 60);
            assert_eq!(regions.len(), oracle_count(&mask, 60));
        }
    }

    fn test_skeleton() -> [[f64; 2]; KEYPOINT_COUNT] {
        // A spread layout: keypoints on diverging rays from the elbow.
        let elbow = [60.0, 110.0];
        let mut out = [[0.0; 2]; KEYPOINT_COUNT];
        let dirs = [
            (0.62, -0.78),
            (0.3, -0.95),
            (0.0, -1.0),
            (-0.3, -0.95),
            (-0.62, -0.78),
        ];
        for kp in KeypointId::all() {
            let ord = kp.ordinal();
            if kp == KeypointId::ELBOW {
                out[ord] = elbow;
                continue;
            }
            let (dx, dy): (f64, f64) = dirs[kp.class() as usize];
            let n = (dx * dx + dy * dy).sqrt();
            let reach = 78.0 - 12.0 * kp.index() as f64;
            out[ord] = [elbow[0] + dx / n * reach, elbow[1] + dy / n * reach];
        }
        out
    }

    #[test]
    fn encode_frame_with_all_regions_matched() {
        let skeleton = test_skeleton();
        let baseline = baseline_from([60.0, 70.0], [60.0, 110.0]).unwrap();
        let regions: Vec<ProspectRegion> = skeleton
            .iter()
            .map(|&[x, y]| ProspectRegion {
                cells: vec![(x as usize, y as usize)],
                centroid: [x, y],
                centroid_depth: None,
                class_hint: None,
            })
            .collect();
        let frame = encode_frame(&regions, &baseline, &skeleton, 0).unwrap();
        for kp in KeypointId::all() {
            assert_eq!(frame.confidence(kp), 1.0);
        }
        for kp in KeypointId::all().filter(|k| *k != KeypointId::ELBOW) {
            let v = frame.vector(kp).unwrap();
            let ord = kp.ordinal();
            let expect_x = (skeleton[ord][0] - 60.0) / baseline.length;
            let expect_y = (skeleton[ord][1] - 70.0) / baseline.length;
            assert!((v.x - expect_x).abs() < 1e-12);
            assert!((v.y - expect_y).abs() < 1e-12);
            assert_eq!(v.z, 0.0);
        }
    }

    #[test]
    fn encode_frame_with_no_regions_is_full_occlusion() {
        let skeleton = test_skeleton();
        let baseline = baseline_from([60.0, 70.0], [60.0, 110.0]).unwrap();
        let frame = encode_frame(&[], &baseline, &skeleton, 3).unwrap();
        for kp in KeypointId::all() {
            assert_eq!(frame.confidence(kp), 0.0);
        }
        assert_eq!(frame.timestamp(), 3);
        let kp = KeypointId::from_ordinal(0).unwrap();
        let v = frame.vector(kp).unwrap();
        assert!((v.x - (skeleton[0][0] - 60.0) / baseline.length).abs() < 1e-12);
    }

    fn rasterize_at_scale(
        scale: f64,
        omit: &[KeypointId],
    ) -> (DepthMask, [[f64; 2]; KEYPOINT_COUNT]) {
        let base = test_skeleton();
        let mut skeleton = [[0.0; 2]; KEYPOINT_COUNT];
        for (i, p) in base.iter().enumerate() {
            skeleton[i] = [p[0] * scale, p[1] * scale];
        }
        let palm = [60.0 * scale, 70.0 * scale];
        // Depth readings are physical and scale with the hand.
        let mask = rasterize_hand(
            &skeleton,
            palm,
            (130.0 * scale) as usize,
            (130.0 * scale) as usize,
            3.0 * scale,
            11.0 * scale,
            &[(200.0 * scale) as u16; KEYPOINT_COUNT],
            (150.0 * scale) as u16,
            omit,
        );
        (mask, skeleton)
    }

    fn encode_mask(
        mask: &DepthMask,
        skeleton: &[[f64; 2]; KEYPOINT_COUNT],
        threshold: u16,
    ) -> HandFrame {
        let center = gravity_center(mask).unwrap();
        let elbow = skeleton[KeypointId::ELBOW.ordinal()];
        let baseline = baseline_from([center.0 as f64, center.1 as f64], elbow).unwrap();
        let regions = segment_prospects(mask, threshold);
        encode_frame(&regions, &baseline, skeleton, 0).unwrap()
    }

    #[test]
    fn encode_frame_scale_invariance() {
        let (mask, skeleton) = rasterize_at_scale(1.0, &[]);
        let reference = encode_mask(&mask, &skeleton, 180);
        for scale in [2.0, 3.0] {
            let (mask, skeleton) = rasterize_at_scale(scale, &[]);
            let scaled = encode_mask(&mask, &skeleton, (180.0 * scale) as u16);
            for kp in KeypointId::all().filter(|k| *k != KeypointId::ELBOW) {
                let a = reference.vector(kp).unwrap();
                let b = scaled.vector(kp).unwrap();
                assert!(
                    (a.x - b.x).abs() < 0.05
                        && (a.y - b.y).abs() < 0.05
                        && (a.z - b.z).abs() < 0.05,
                    "scale {scale} moved {kp}: ({}, {}, {}) vs ({}, {}, {})",
                    a.x,
                    a.y,
                    a.z,
                    b.x,
                    b.y,
                    b.z
                );
            }
        }
    }

    fn upscale_nearest(mask: &DepthMask, factor: usize) -> DepthMask {
        let (w, h) = (mask.width() * factor, mask.height() * factor);
        let mut cells = vec![0u16; w * h];
        for y in 0..h {
            for x in 0..w {
                cells[y * w + x] = mask.at(x / factor, y / factor);
            }
        }
        DepthMask::new(w, h, cells).unwrap()
    }

    #[test]
    fn encode_frame_upscaled_mask_invariance_with_occlusion() {
        // Half the keypoints hidden, tiny depth readings so the gray levels
        // (which nearest-neighbor upscaling preserves) barely perturb z.
        let omit: Vec<KeypointId> = KeypointId::all()
            .filter(|k| k.ordinal() % 2 == 1 && *k != KeypointId::ELBOW)
            .collect();
        let skeleton = test_skeleton();
        let mask = rasterize_hand(
            &skeleton,
            [60.0, 70.0],
            130,
            130,
            3.0,
            11.0,
            &[2; KEYPOINT_COUNT],
            1,
            &omit,
        );
        let a = encode_mask(&mask, &skeleton, 2);

        let big = upscale_nearest(&mask, 2);
        let mut big_skeleton = [[0.0; 2]; KEYPOINT_COUNT];
        for (i, p) in skeleton.iter().enumerate() {
            big_skeleton[i] = [p[0] * 2.0, p[1] * 2.0];
        }
        let b = encode_mask(&big, &big_skeleton, 2);

        for kp in KeypointId::all().filter(|k| *k != KeypointId::ELBOW) {
            let va = a.vector(kp).unwrap();
            let vb = b.vector(kp).unwrap();
            assert!(
                (va.x - vb.x).abs() < 0.05
                    && (va.y - vb.y).abs() < 0.05
                    && (va.z - vb.z).abs() < 0.05,
                "{kp}: ({}, {}, {}) vs ({}, {}, {})",
                va.x,
                va.y,
                va.z,
                vb.x,
                vb.y,
                vb.z
            );
            assert_eq!(a.confidence(kp), b.confidence(kp));
        }
        for kp in &omit {
            assert_eq!(a.confidence(*kp), 0.0);
        }
    }
}
