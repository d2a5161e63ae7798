//! Exact Euclidean distance transform (separable lower-envelope method) in
//! integer voxel units.

use rayon::prelude::*;

use super::VoxelGrid;

const INF: f64 = f64::INFINITY;

/// Squared 1D distance transform of `f` into `d`. Infinite entries are not
/// parabola sites. `v` and `z` are scratch of length `n` and `n + 1`.
fn edt_1d(f: &[f64], d: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k: usize = 0;
    let mut any = false;
    for q in 0..n {
        if f[q] == INF {
            continue;
        }
        if !any {
            any = true;
            k = 0;
            v[0] = q;
            z[0] = -INF;
            z[1] = INF;
            continue;
        }
        let qf = q as f64;
        loop {
            let p = v[k];
            let pf = p as f64;
            let s = ((f[q] + qf * qf) - (f[p] + pf * pf)) / (2.0 * (qf - pf));
            if s <= z[k] {
                if k == 0 {
                    v[0] = q;
                    z[0] = -INF;
                    z[1] = INF;
                    break;
                }
                k -= 1;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = INF;
                break;
            }
        }
    }
    if !any {
        d.fill(INF);
        return;
    }
    let mut k = 0;
    for (q, out) in d.iter_mut().enumerate() {
        let qf = q as f64;
        while z[k + 1] < qf {
            k += 1;
        }
        let dq = qf - v[k] as f64;
        *out = dq * dq + f[v[k]];
    }
}

/// Squared distances (voxel units) from every voxel to the nearest source.
pub(crate) fn squared_edt(sources: &[bool], dims: [usize; 3]) -> Vec<f64> {
    let [nx, ny, nz] = dims;
    let plane = nx * ny;
    let mut g: Vec<f64> = sources.iter().map(|s| if *s { 0.0 } else { INF }).collect();

    // x then y inside each z-slice
    g.par_chunks_mut(plane).for_each(|slice| {
        let m = nx.max(ny);
        let mut f = vec![0.0; m];
        let mut d = vec![0.0; m];
        let mut v = vec![0usize; m];
        let mut z = vec![0.0; m + 1];
        for y in 0..ny {
            let row = &mut slice[y * nx..(y + 1) * nx];
            f[..nx].copy_from_slice(row);
            edt_1d(&f[..nx], row, &mut v, &mut z);
        }
        for x in 0..nx {
            for y in 0..ny {
                f[y] = slice[x + nx * y];
            }
            edt_1d(&f[..ny], &mut d[..ny], &mut v, &mut z);
            for y in 0..ny {
                slice[x + nx * y] = d[y];
            }
        }
    });

    // z, one column at a time
    let mut f = vec![0.0; nz];
    let mut d = vec![0.0; nz];
    let mut v = vec![0usize; nz];
    let mut z = vec![0.0; nz + 1];
    for i in 0..plane {
        for k in 0..nz {
            f[k] = g[i + plane * k];
        }
        edt_1d(&f, &mut d, &mut v, &mut z);
        for k in 0..nz {
            g[i + plane * k] = d[k];
        }
    }
    g
}

/// Surface voxels: fused voxels at or behind a surface (tsdf ≤ 0), plus
/// fused free voxels with such a voxel among their 26 neighbors.
pub(crate) fn surface_mask(grid: &VoxelGrid) -> Vec<bool> {
    let [nx, ny, nz] = grid.dims();
    let fused = |i: usize| grid.weight[i] > 0.0;
    let mut mask: Vec<bool> = (0..grid.len())
        .map(|i| grid.observed[i] && fused(i) && grid.tsdf[i] <= 0.0)
        .collect();
    let inside: Vec<usize> = (0..grid.len())
        .filter(|&i| fused(i) && grid.tsdf[i] <= 0.0)
        .collect();
    for i in inside {
        let [x, y, z] = grid.coords(i);
        for dz in -1i64..=1 {
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let (a, b, c) = (x as i64 + dx, y as i64 + dy, z as i64 + dz);
                    if a < 0 || b < 0 || c < 0 || a >= nx as i64 || b >= ny as i64 || c >= nz as i64 {
                        continue;
                    }
                    let j = grid.index(a as usize, b as usize, c as usize);
                    if grid.observed[j] && fused(j) && grid.tsdf[j] > 0.0 {
                        mask[j] = true;
                    }
                }
            }
        }
    }
    mask
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PropagationStats {
    pub surface_voxels: usize,
    pub unknown_sources: usize,
}

/// Full recompute of the ESDF of every observed voxel from the current
/// surface set. With `unknown_as_occupied`, never-observed voxels also act
/// as obstacles, so free space is only claimed where it was seen.
pub fn propagate_esdf(grid: &mut VoxelGrid, unknown_as_occupied: bool) -> PropagationStats {
    let mut sources = surface_mask(grid);
    let surface_voxels = sources.iter().filter(|s| **s).count();
    let mut unknown_sources = 0;
    if unknown_as_occupied {
        for (s, o) in sources.iter_mut().zip(&grid.observed) {
            if !*o {
                *s = true;
                unknown_sources += 1;
            }
        }
    }
    let res = grid.resolution();
    let diag = grid.diagonal();
    if surface_voxels + unknown_sources == 0 {
        for (e, o) in grid.esdf.iter_mut().zip(&grid.observed) {
            *e = if *o { diag } else { f64::NAN };
        }
    } else {
        let d2 = squared_edt(&sources, grid.dims());
        for ((e, o), d) in grid.esdf.iter_mut().zip(&grid.observed).zip(&d2) {
            *e = if *o { d.sqrt() * res } else { f64::NAN };
        }
    }
    PropagationStats {
        surface_voxels,
        unknown_sources,
    }
}

/// Recomputes the ESDF of the voxels seen by the latest integrated image
/// from that image alone and zeroes their corrections. Sources are the
/// voxels it did not see, the voxels it saw at or behind a surface, and
/// seen voxels bordering either kind or the grid edge, so the new values
/// hold under the pose the image was fused with. Other voxels keep their
/// distance and correction. Returns the stats and the number refreshed.
///
/// Voxels outside the viewed box are all sources, so the transform runs on
/// the box grown by one layer and is still exact inside it.
pub fn refresh_esdf_in_view(grid: &mut VoxelGrid) -> (PropagationStats, usize) {
    let dims = grid.dims();
    let mut lo = dims;
    let mut hi = [0usize; 3];
    for (i, v) in grid.view_sdf.iter().enumerate() {
        if !v.is_nan() {
            let c = grid.coords(i);
            for k in 0..3 {
                lo[k] = lo[k].min(c[k]);
                hi[k] = hi[k].max(c[k] + 1);
            }
        }
    }
    if (0..3).any(|k| lo[k] >= hi[k]) {
        return (PropagationStats::default(), 0);
    }
    for k in 0..3 {
        lo[k] = lo[k].saturating_sub(1);
        hi[k] = (hi[k] + 1).min(dims[k]);
    }
    let sub = [hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]];
    let sub_index = |x: usize, y: usize, z: usize| (x - lo[0]) + sub[0] * ((y - lo[1]) + sub[1] * (z - lo[2]));
    // unseen cells may hold an obstacle reaching into their neighbors
    let blocked = |i: usize| !(grid.view_sdf[i] > 0.0);
    let surface = |x: usize, y: usize, z: usize| {
        let s = grid.view_sdf[grid.index(x, y, z)];
        if s.is_nan() || s <= 0.0 {
            return s <= 0.0;
        }
        // cells past the grid edge count as unseen
        if [x, y, z].iter().zip(&dims).any(|(&c, &n)| c == 0 || c + 1 == n) {
            return true;
        }
        let r = |c: usize, n: usize| c.saturating_sub(1)..(c + 2).min(n);
        r(z, dims[2]).any(|c| r(y, dims[1]).any(|b| r(x, dims[0]).any(|a| blocked(grid.index(a, b, c)))))
    };
    let mut sources = vec![false; sub.iter().product()];
    sources
        .par_chunks_mut(sub[0] * sub[1])
        .enumerate()
        .for_each(|(dz, slice)| {
            let z = lo[2] + dz;
            for y in lo[1]..hi[1] {
                for x in lo[0]..hi[0] {
                    let seen = !grid.view_sdf[grid.index(x, y, z)].is_nan();
                    slice[(x - lo[0]) + sub[0] * (y - lo[1])] = !seen || surface(x, y, z);
                }
            }
        });
    let mut stats = PropagationStats::default();
    for z in lo[2]..hi[2] {
        for y in lo[1]..hi[1] {
            for x in lo[0]..hi[0] {
                if sources[sub_index(x, y, z)] {
                    if grid.view_sdf[grid.index(x, y, z)].is_nan() {
                        stats.unknown_sources += 1;
                    } else {
                        stats.surface_voxels += 1;
                    }
                }
            }
        }
    }
    let d2 = squared_edt(&sources, sub);
    let res = grid.resolution();
    let diag = grid.diagonal();
    let frame = grid.frame;
    let mut refreshed = 0;
    for z in lo[2]..hi[2] {
        for y in lo[1]..hi[1] {
            for x in lo[0]..hi[0] {
                let i = grid.index(x, y, z);
                if grid.view_sdf[i].is_nan() {
                    continue;
                }
                let d = d2[sub_index(x, y, z)];
                grid.esdf[i] = if d.is_finite() { d.sqrt() * res } else { diag };
                grid.correction[i] = 0.0;
                grid.observed[i] = true;
                grid.stamp[i] = frame;
                refreshed += 1;
            }
        }
    }
    (stats, refreshed)
}
