//! Grayscale images and plain PGM (P2 / P5) I/O.

use std::io::{Read, Write};

use rand::seq::index;
use rand::Rng;

use crate::error::{MrfError, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    /// Largest representable value (the PGM maxval).
    max_value: u8,
    pixels: Vec<u8>,
}

fn image_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(MrfError::Image(msg.into()))
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        Self::with_max_value(width, height, 255, pixels)
    }

    pub fn with_max_value(
        width: usize,
        height: usize,
        max_value: u8,
        pixels: Vec<u8>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return image_err("image dimensions must be positive");
        }
        if pixels.len() != width * height {
            return image_err(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            ));
        }
        if max_value == 0 {
            return image_err("max value must be positive");
        }
        if let Some(&v) = pixels.iter().find(|&&v| v > max_value) {
            return image_err(format!("pixel value {v} exceeds max value {max_value}"));
        }
        Ok(Self {
            width,
            height,
            max_value,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn max_value(&self) -> u8 {
        self.max_value
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    /// Sorted distinct pixel values.
    pub fn palette(&self) -> Vec<u8> {
        let mut seen = [false; 256];
        self.pixels.iter().for_each(|&v| seen[v as usize] = true);
        (0..=255u8).filter(|&v| seen[v as usize]).collect()
    }

    /// Maps pixels `>= threshold` to 1 and the rest to 0 (max value 1).
    pub fn binarize(&self, threshold: u8) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            max_value: 1,
            pixels: self
                .pixels
                .iter()
                .map(|&v| u8::from(v >= threshold))
                .collect(),
        }
    }

    pub fn is_binary(&self) -> bool {
        self.pixels.iter().all(|&v| v <= 1)
    }

    /// Reads a P2 (ASCII) or P5 (binary, 8-bit) PGM.
    pub fn read_pgm<R: Read>(mut reader: R) -> Result<Self> {
        let mut bytes = Vec::new();
        reader
            .read_to_end(&mut bytes)
            .map_err(|e| MrfError::Image(e.to_string()))?;
        let mut pos = 0;
        let magic = next_token(&bytes, &mut pos)?;
        let width = parse_header_number(&bytes, &mut pos, "width")?;
        let height = parse_header_number(&bytes, &mut pos, "height")?;
        let maxval = parse_header_number(&bytes, &mut pos, "maxval")?;
        if maxval == 0 || maxval > 255 {
            return image_err(format!("unsupported maxval {maxval}"));
        }
        let count = width * height;
        let pixels = match magic.as_str() {
            "P2" => (0..count)
                .map(|_| parse_header_number(&bytes, &mut pos, "pixel").map(|v| v as u8))
                .collect::<Result<Vec<u8>>>()?,
            "P5" => {
                // Exactly one whitespace byte separates the header from the raster.
                pos += 1;
                if bytes.len() < pos + count {
                    return image_err("truncated P5 raster");
                }
                bytes[pos..pos + count].to_vec()
            }
            other => return image_err(format!("unsupported PGM magic `{other}`")),
        };
        Self::with_max_value(width, height, maxval as u8, pixels)
    }

    /// Writes an ASCII (P2) PGM.
    pub fn write_pgm_ascii<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "P2")?;
        writeln!(out, "{} {}", self.width, self.height)?;
        writeln!(out, "{}", self.max_value)?;
        for row in self.pixels.chunks(self.width) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        Ok(())
    }

    /// Writes a binary (P5) PGM.
    pub fn write_pgm_binary<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write!(
            out,
            "P5\n{} {}\n{}\n",
            self.width, self.height, self.max_value
        )?;
        out.write_all(&self.pixels)
    }
}

fn next_token(bytes: &[u8], pos: &mut usize) -> Result<String> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return image_err("unexpected end of PGM data");
    }
    Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
}

fn parse_header_number(bytes: &[u8], pos: &mut usize, what: &str) -> Result<usize> {
    let tok = next_token(bytes, pos)?;
    tok.parse()
        .map_err(|_| MrfError::Image(format!("bad {what} `{tok}`")))
}

/// Replaces `round(fraction * pixel_count)` uniformly chosen pixels with
/// 0 or the image's max value by a fair coin.
pub fn salt_pepper<R: Rng + ?Sized>(image: &GrayImage, fraction: f64, rng: &mut R) -> GrayImage {
    assert!(
        (0.0..=1.0).contains(&fraction),
        "fraction must lie in [0, 1]"
    );
    let n = image.pixels.len();
    let count = ((fraction * n as f64).round() as usize).min(n);
    let mut out = image.clone();
    for p in index::sample(rng, n, count) {
        out.pixels[p] = if rng.random::<bool>() {
            image.max_value
        } else {
            0
        };
    }
    out
}
