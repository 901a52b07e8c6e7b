use super::grid::window_offsets;
use crate::energy::{table_is_submodular, DiscreteEnergy, GraphTopology};
use crate::error::{invalid, MrfError, Result};
use crate::image::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TextureParams {
    /// Number of submodular offsets kept.
    pub submodular: usize,
    /// Number of non-submodular offsets kept.
    pub non_submodular: usize,
    pub beta: f64,
    /// Side of the square window offsets are drawn from.
    pub window: usize,
}

impl Default for TextureParams {
    fn default() -> Self {
        Self {
            submodular: 3,
            non_submodular: 3,
            beta: 1.0,
            window: 35,
        }
    }
}

/// Statistics of one pixel offset `(dy, dx)` learned from a clean texture.
#[derive(Debug, Clone, PartialEq)]
pub struct OffsetStats {
    pub offset: (isize, isize),
    /// `-log((H(i,j) + 1) / (total + 4))`, row-major over `(i, j)`.
    pub table: [f64; 4],
    /// Absolute covariance of the two pixels.
    pub relevance: f64,
    pub submodular: bool,
}

fn require_binary(img: &GrayImage, what: &str) -> Result<()> {
    if img.is_binary() {
        Ok(())
    } else {
        Err(MrfError::Image(format!(
            "{what} image must be binary (values 0 and 1)"
        )))
    }
}

/// Joint statistics for every offset in half of a `window x window` square.
pub fn learn_offsets(clean: &GrayImage, window: usize) -> Result<Vec<OffsetStats>> {
    require_binary(clean, "clean")?;
    if window == 0 {
        return invalid("window must be positive");
    }
    let (w, h) = (clean.width() as isize, clean.height() as isize);
    let px = clean.pixels();
    let mut out = Vec::new();
    for (dy, dx) in window_offsets(window / 2) {
        let mut hist = [0u64; 4];
        for r in 0..h - dy {
            for c in (-dx).max(0)..(w - dx).min(w) {
                let a = px[(r * w + c) as usize] as usize;
                let b = px[((r + dy) * w + c + dx) as usize] as usize;
                hist[2 * a + b] += 1;
            }
        }
        let total: u64 = hist.iter().sum();
        let table = hist.map(|c| -((c as f64 + 1.0) / (total as f64 + 4.0)).ln());
        let relevance = if total == 0 {
            0.0
        } else {
            let t = total as f64;
            let both = hist[3] as f64 / t;
            let first = (hist[2] + hist[3]) as f64 / t;
            let second = (hist[1] + hist[3]) as f64 / t;
            (both - first * second).abs()
        };
        out.push(OffsetStats {
            offset: (dy, dx),
            table,
            relevance,
            submodular: table_is_submodular(&table),
        });
    }
    Ok(out)
}

/// The `submodular` most relevant submodular offsets followed by the `non_submodular`
/// most relevant others. Ties keep offset order.
pub fn select_offsets(
    stats: &[OffsetStats],
    submodular: usize,
    non_submodular: usize,
) -> Result<Vec<OffsetStats>> {
    let mut ranked: Vec<&OffsetStats> = stats.iter().collect();
    ranked.sort_by(|a, b| b.relevance.total_cmp(&a.relevance));
    let sub: Vec<_> = ranked.iter().filter(|s| s.submodular).collect();
    let non: Vec<_> = ranked.iter().filter(|s| !s.submodular).collect();
    if sub.len() < submodular || non.len() < non_submodular {
        return Err(MrfError::InsufficientOffsets {
            wanted_submodular: submodular,
            wanted_non_submodular: non_submodular,
            found_submodular: sub.len(),
            found_non_submodular: non.len(),
        });
    }
    Ok(sub
        .into_iter()
        .take(submodular)
        .chain(non.into_iter().take(non_submodular))
        .map(|s| (*s).clone())
        .collect())
}

/// Binary texture restoration energy: unary `-beta / (1 + |I_p - x_p|)` from the noisy
/// image, pairwise tables learned from the clean texture on the selected offsets.
pub fn gen_texture(
    clean: &GrayImage,
    noisy: &GrayImage,
    params: &TextureParams,
) -> Result<DiscreteEnergy> {
    require_binary(noisy, "noisy")?;
    let stats = learn_offsets(clean, params.window)?;
    let chosen = select_offsets(&stats, params.submodular, params.non_submodular)?;

    let (w, h) = (noisy.width() as isize, noisy.height() as isize);
    let mut edges = Vec::new();
    let mut pairwise = Vec::new();
    for s in &chosen {
        let (dy, dx) = s.offset;
        for r in 0..h - dy {
            for c in (-dx).max(0)..(w - dx).min(w) {
                edges.push(((r * w + c) as usize, ((r + dy) * w + c + dx) as usize));
                pairwise.extend_from_slice(&s.table);
            }
        }
    }
    let unary = noisy
        .pixels()
        .iter()
        .flat_map(|&i| {
            let i = i as f64;
            [0.0, 1.0].map(|x| -params.beta / (1.0 + (i - x).abs()))
        })
        .collect();
    let topo = GraphTopology::new(noisy.pixels().len(), edges)?;
    DiscreteEnergy::new(topo, 2, unary, pairwise, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn stripes(w: usize, h: usize) -> GrayImage {
        // Vertical stripes of width 1: columns alternate 0, 1.
        let px = (0..w * h).map(|k| (k % w % 2) as u8).collect();
        GrayImage::with_max_value(w, h, 1, px).unwrap()
    }

    #[test]
    fn window_has_612_offsets() {
        let img = stripes(40, 40);
        assert_eq!(learn_offsets(&img, 35).unwrap().len(), 612);
    }

    #[test]
    fn stripe_histograms() {
        let img = stripes(4, 4);
        let stats = learn_offsets(&img, 3).unwrap();
        // (1, 0): same column, always equal -> 6 pairs of each 00 and 11.
        let down = stats.iter().find(|s| s.offset == (1, 0)).unwrap();
        let diag = -(7.0f64 / 16.0).ln();
        let off = -(1.0f64 / 16.0).ln();
        assert_eq!(down.table, [diag, off, off, diag]);
        assert!(down.submodular);
        assert!((down.relevance - 0.25).abs() < 1e-12);
        // (0, 1): neighbors always differ.
        let right = stats.iter().find(|s| s.offset == (0, 1)).unwrap();
        assert!(!right.submodular);
    }

    #[test]
    fn constant_image_ties_follow_offset_order() {
        let img = GrayImage::with_max_value(10, 10, 1, vec![1; 100]).unwrap();
        let stats = learn_offsets(&img, 5).unwrap();
        assert!(stats.iter().all(|s| s.relevance == 0.0));
        // Constant images give submodular tables everywhere.
        let picked = select_offsets(&stats, 2, 0).unwrap();
        assert_eq!(picked[0].offset, stats[0].offset);
        assert_eq!(picked[1].offset, stats[1].offset);
        let err = select_offsets(&stats, 1, 1).unwrap_err();
        assert!(matches!(
            err,
            MrfError::InsufficientOffsets {
                found_non_submodular: 0,
                ..
            }
        ));
    }

    #[test]
    fn six_offset_families() {
        let img = stripes(12, 12);
        let params = TextureParams {
            window: 7,
            beta: 2.0,
            ..Default::default()
        };
        let e = gen_texture(&img, &img, &params).unwrap();
        let families: HashSet<(isize, isize)> = e
            .topology()
            .edges()
            .iter()
            .map(|&(p, q)| {
                let d = q as isize - p as isize;
                let (pc, qc) = ((p % 12) as isize, (q % 12) as isize);
                ((d - (qc - pc)) / 12, qc - pc)
            })
            .collect();
        assert_eq!(families.len(), 6);
        assert_eq!(e.unary(1), &[-1.0, -2.0]);
        assert_eq!(e.unary(0), &[-2.0, -1.0]);
    }

    #[test]
    fn rejects_gray_input() {
        let gray = GrayImage::new(4, 4, vec![7; 16]).unwrap();
        let bin = stripes(4, 4);
        assert!(gen_texture(&gray, &bin, &TextureParams::default()).is_err());
        assert!(gen_texture(&bin, &gray, &TextureParams::default()).is_err());
    }
}
