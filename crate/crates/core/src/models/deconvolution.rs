use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::grid::{grid_topology, window_offsets};
use crate::energy::{DiscreteEnergy, Labeling};
use crate::error::{invalid, Result};
use crate::image::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeconvolutionParams {
    pub kernel_sigma: f64,
    /// Odd kernel width.
    pub kernel_size: usize,
    pub noise_sigma: f64,
    /// Weight of the Potts prior.
    pub smoothness: f64,
}

impl Default for DeconvolutionParams {
    fn default() -> Self {
        Self {
            kernel_sigma: 3.0,
            kernel_size: 3,
            noise_sigma: 10.0,
            smoothness: 50.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DeconvolutionProblem {
    pub energy: DiscreteEnergy,
    pub noisy: GrayImage,
    /// Intensity of each label, ascending.
    pub palette: Vec<u8>,
    pub kernel: Vec<f64>,
    pub kernel_size: usize,
}

impl DeconvolutionProblem {
    /// Labeling of the clean image (each pixel's palette index).
    pub fn labels_of(&self, image: &GrayImage) -> Result<Labeling> {
        labels_of(image, &self.palette)
    }

    pub fn render(&self, x: &Labeling) -> Result<GrayImage> {
        GrayImage::new(
            self.noisy.width(),
            self.noisy.height(),
            x.iter().map(|&l| self.palette[l]).collect(),
        )
    }
}

fn labels_of(image: &GrayImage, palette: &[u8]) -> Result<Labeling> {
    image
        .pixels()
        .iter()
        .map(|v| match palette.binary_search(v) {
            Ok(i) => Ok(i),
            Err(_) => invalid(format!("pixel value {v} is not in the palette")),
        })
        .collect::<Result<Vec<_>>>()
        .map(Labeling::new)
}

/// Three-tone test scene: a bright disk and a mid-gray rectangle on a dark background.
pub fn three_tone_scene(side: usize) -> Result<GrayImage> {
    if side < 8 {
        return invalid("scene side must be at least 8");
    }
    let n = side as f64;
    let mut px = vec![40u8; side * side];
    for r in 0..side {
        for c in 0..side {
            let (y, x) = (r as f64 - 0.4 * n, c as f64 - 0.35 * n);
            if (y * y + x * x).sqrt() < 0.25 * n {
                px[r * side + c] = 200;
            }
            if r > side / 2 && c > side / 2 && r < side * 7 / 8 && c < side * 15 / 16 {
                px[r * side + c] = 120;
            }
        }
    }
    GrayImage::new(side, side, px)
}

/// Gaussian `size x size` kernel normalized to sum 1, row-major.
pub fn gaussian_kernel(size: usize, sigma: f64) -> Result<Vec<f64>> {
    if size.is_multiple_of(2) {
        return invalid("kernel size must be odd");
    }
    if sigma.is_nan() || sigma <= 0.0 {
        return invalid("kernel sigma must be positive");
    }
    let r = (size / 2) as isize;
    let mut k = Vec::with_capacity(size * size);
    for dy in -r..=r {
        for dx in -r..=r {
            k.push((-((dy * dy + dx * dx) as f64) / (2.0 * sigma * sigma)).exp());
        }
    }
    let total: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= total);
    Ok(k)
}

/// Zero-padded convolution of a row-major image with a symmetric-support kernel:
/// `out[p] = sum_d kernel[d] * values[p - d]`.
pub fn blur(values: &[f64], width: usize, height: usize, kernel: &[f64], size: usize) -> Vec<f64> {
    let r = (size / 2) as isize;
    let mut out = vec![0.0; width * height];
    for row in 0..height as isize {
        for col in 0..width as isize {
            let mut acc = 0.0;
            for dy in -r..=r {
                for dx in -r..=r {
                    let (qr, qc) = (row - dy, col - dx);
                    if qr >= 0 && qc >= 0 && qr < height as isize && qc < width as isize {
                        let k = kernel[((dy + r) as usize) * size + (dx + r) as usize];
                        acc += k * values[qr as usize * width + qc as usize];
                    }
                }
            }
            out[row as usize * width + col as usize] = acc;
        }
    }
    out
}

/// Blurs `clean`, adds Gaussian noise, rounds and clips to `[0, 255]`, and builds the
/// deconvolution energy for the result.
pub fn gen_deconvolution<R: Rng + ?Sized>(
    clean: &GrayImage,
    params: &DeconvolutionParams,
    rng: &mut R,
) -> Result<DeconvolutionProblem> {
    let palette = clean.palette();
    if palette.len() != 3 {
        return invalid(format!(
            "clean image must use exactly 3 gray values, found {}",
            palette.len()
        ));
    }
    if params.noise_sigma.is_nan() || params.noise_sigma < 0.0 {
        return invalid("noise sigma must be nonnegative");
    }
    let kernel = gaussian_kernel(params.kernel_size, params.kernel_sigma)?;
    let (w, h) = (clean.width(), clean.height());
    let values: Vec<f64> = clean.pixels().iter().map(|&v| v as f64).collect();
    let blurred = blur(&values, w, h, &kernel, params.kernel_size);
    let noise = Normal::new(0.0, params.noise_sigma).expect("validated sigma");
    let noisy_pixels = blurred
        .iter()
        .map(|&b| (b + noise.sample(rng)).round().clamp(0.0, 255.0) as u8)
        .collect();
    let noisy = GrayImage::new(w, h, noisy_pixels)?;
    let energy = deconvolution_energy(
        &noisy,
        &palette,
        &kernel,
        params.kernel_size,
        params.smoothness,
    )?;
    Ok(DeconvolutionProblem {
        energy,
        noisy,
        palette,
        kernel,
        kernel_size: params.kernel_size,
    })
}

/// Energy `||K * v(x) - noisy||^2 + smoothness * #{pq : x_p != x_q}` with the square
/// expanded into unary and pairwise terms. Pairs are all pixels within the kernel's
/// autocorrelation support (a `(2s-1) x (2s-1)` window for an `s x s` kernel).
pub fn deconvolution_energy(
    noisy: &GrayImage,
    palette: &[u8],
    kernel: &[f64],
    size: usize,
    smoothness: f64,
) -> Result<DiscreteEnergy> {
    if size.is_multiple_of(2) || kernel.len() != size * size {
        return invalid("kernel must be square with odd size");
    }
    if palette.len() < 2 || palette.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("palette must hold at least 2 ascending values");
    }
    let (w, h) = (noisy.width(), noisy.height());
    let r = (size / 2) as isize;
    let l = palette.len();
    let v: Vec<f64> = palette.iter().map(|&p| p as f64).collect();
    let obs: Vec<f64> = noisy.pixels().iter().map(|&p| p as f64).collect();
    let k_at = |dy: isize, dx: isize| -> f64 {
        if dy.abs() > r || dx.abs() > r {
            0.0
        } else {
            kernel[((dy + r) as usize) * size + (dx + r) as usize]
        }
    };
    let inside =
        |row: isize, col: isize| row >= 0 && col >= 0 && row < h as isize && col < w as isize;

    // Pixel q contributes K[p - q] v(x_q) to every observation p within the kernel window.
    let mut unary = Vec::with_capacity(w * h * l);
    for qr in 0..h as isize {
        for qc in 0..w as isize {
            let (mut sq, mut cross) = (0.0, 0.0);
            for dy in -r..=r {
                for dx in -r..=r {
                    if inside(qr + dy, qc + dx) {
                        let k = k_at(dy, dx);
                        sq += k * k;
                        cross += k * obs[((qr + dy) as usize) * w + (qc + dx) as usize];
                    }
                }
            }
            unary.extend(v.iter().map(|&va| va * va * sq - 2.0 * va * cross));
        }
    }

    let offsets = window_offsets(2 * r as usize);
    let topo = grid_topology(w, h, &offsets)?;
    let mut pairwise = Vec::with_capacity(topo.edge_count() * l * l);
    for &(q, s) in topo.edges() {
        let (qr, qc) = ((q / w) as isize, (q % w) as isize);
        let (sr, sc) = ((s / w) as isize, (s % w) as isize);
        // Overlap of the two kernel footprints, clipped to the image.
        let mut overlap = 0.0;
        for pr in qr.max(sr) - r..=qr.min(sr) + r {
            for pc in qc.max(sc) - r..=qc.min(sc) + r {
                if inside(pr, pc) {
                    overlap += k_at(pr - qr, pc - qc) * k_at(pr - sr, pc - sc);
                }
            }
        }
        for a in 0..l {
            for b in 0..l {
                let potts = if a == b { 0.0 } else { smoothness };
                pairwise.push(2.0 * overlap * v[a] * v[b] + potts);
            }
        }
    }
    let constant = obs.iter().map(|o| o * o).sum();
    DiscreteEnergy::new(topo, l, unary, pairwise, 1.0)?.with_constant(constant)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn three_tone(w: usize, h: usize, rng: &mut ChaCha8Rng) -> GrayImage {
        let tones = [20u8, 120, 230];
        let mut px: Vec<u8> = (0..w * h).map(|_| tones[rng.random_range(0..3)]).collect();
        px[..3].copy_from_slice(&tones);
        GrayImage::new(w, h, px).unwrap()
    }

    fn misfit(p: &DeconvolutionProblem, x: &Labeling, smoothness: f64) -> f64 {
        let (w, h) = (p.noisy.width(), p.noisy.height());
        let vals: Vec<f64> = x.iter().map(|&l| p.palette[l] as f64).collect();
        let pred = blur(&vals, w, h, &p.kernel, p.kernel_size);
        let data: f64 = pred
            .iter()
            .zip(p.noisy.pixels())
            .map(|(a, &b)| (a - b as f64).powi(2))
            .sum();
        let disagreements = p
            .energy
            .topology()
            .edges()
            .iter()
            .filter(|&&(a, b)| x[a] != x[b])
            .count();
        data + smoothness * disagreements as f64
    }

    #[test]
    fn kernel_is_normalized() {
        let k = gaussian_kernel(3, 3.0).unwrap();
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(k[4] > k[0]);
        assert!(gaussian_kernel(4, 1.0).is_err());
    }

    #[test]
    fn matches_forward_model() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let clean = three_tone(3, 3, &mut rng);
        let params = DeconvolutionParams {
            smoothness: 7.5,
            ..Default::default()
        };
        let p = gen_deconvolution(&clean, &params, &mut rng).unwrap();
        for _ in 0..20 {
            let x = Labeling::new((0..9).map(|_| rng.random_range(0..3)).collect());
            let direct = misfit(&p, &x, 7.5);
            assert!((p.energy.evaluate(&x).unwrap() - direct).abs() < 1e-6 * direct.max(1.0));
        }
    }

    #[test]
    fn identity_kernel_without_noise_recovers_clean() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let clean = three_tone(5, 4, &mut rng);
        let params = DeconvolutionParams {
            kernel_sigma: 1e-3,
            kernel_size: 3,
            noise_sigma: 0.0,
            smoothness: 0.0,
        };
        let p = gen_deconvolution(&clean, &params, &mut rng).unwrap();
        assert_eq!(p.noisy, clean);
        let x = p.labels_of(&clean).unwrap();
        assert_eq!(p.energy.evaluate(&x).unwrap(), 0.0);
        assert_eq!(p.render(&x).unwrap(), clean);
    }

    #[test]
    fn interior_degree_is_24() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let clean = three_tone(7, 7, &mut rng);
        let p = gen_deconvolution(&clean, &DeconvolutionParams::default(), &mut rng).unwrap();
        let adj = p.energy.topology().adjacency();
        assert_eq!(adj[3 * 7 + 3].len(), 24);
    }

    #[test]
    fn scene_has_three_tones() {
        assert_eq!(three_tone_scene(64).unwrap().palette(), vec![40, 120, 200]);
        assert_eq!(three_tone_scene(8).unwrap().palette().len(), 3);
    }

    #[test]
    fn palette_must_have_three_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let two = GrayImage::new(2, 1, vec![0, 9]).unwrap();
        assert!(gen_deconvolution(&two, &DeconvolutionParams::default(), &mut rng).is_err());
    }
}
