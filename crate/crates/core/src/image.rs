//! Square grayscale images with values in `[0, 1]`.

use std::f64::consts::FRAC_PI_2;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::basis::hermite_zeros;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    size: usize,
    pixels: Vec<f64>,
}

impl Image {
    pub fn new(size: usize, pixels: Vec<f64>) -> Result<Self> {
        if size == 0 {
            return Err(Error::EmptyGrid);
        }
        if pixels.len() != size * size {
            return Err(Error::DimensionMismatch {
                expected: size * size,
                got: pixels.len(),
            });
        }
        if let Some(v) = pixels.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Domain(format!("pixel value {v} outside [0, 1]")));
        }
        Ok(Image { size, pixels })
    }

    pub fn blank(size: usize) -> Self {
        Image {
            size,
            pixels: vec![0.0; size * size],
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Row-major values.
    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.pixels[r * self.size + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.pixels[r * self.size + c] = v.clamp(0.0, 1.0);
    }

    /// Counterclockwise rotation by `theta` about the image centre. Quarter
    /// turns permute pixels exactly; other angles use bilinear interpolation
    /// with zero padding.
    pub fn rotate(&self, theta: f64) -> Image {
        let cen = (self.size as f64 - 1.0) / 2.0;
        let axis: Vec<f64> = (0..self.size).map(|k| k as f64 - cen).collect();
        self.rotate_on_axis(theta, &axis)
    }

    /// Rotation of the function sampled at pixel `(r, c)` = point
    /// `(axis[c], axis[M-1-r])`, for an ascending axis symmetric about zero.
    /// Off-grid values are bilinear in the axis index; outside is zero.
    pub fn rotate_on_axis(&self, theta: f64, axis: &[f64]) -> Image {
        let turns = theta / FRAC_PI_2;
        let q = turns.round();
        if (turns - q).abs() < 1e-12 {
            return self.quarter_turns(q.rem_euclid(4.0) as usize);
        }
        let m = self.size;
        assert_eq!(axis.len(), m, "axis length must match the image size");
        let (s, c) = theta.sin_cos();
        let locate = |t: f64| -> Option<f64> {
            if t < axis[0] || t > axis[m - 1] {
                return None;
            }
            let k = axis.partition_point(|v| *v <= t).clamp(1, m.max(2) - 1);
            let (a, b) = (axis[k - 1], axis[k]);
            Some((k - 1) as f64 + if b > a { (t - a) / (b - a) } else { 0.0 })
        };
        let mut out = vec![0.0; m * m];
        for r in 0..m {
            for col in 0..m {
                let (x, y) = (axis[col], axis[m - 1 - r]);
                // source point R_{-theta} (x, y)
                let (xs, ys) = (c * x + s * y, -s * x + c * y);
                if let (Some(fc), Some(fy)) = (locate(xs), locate(ys)) {
                    out[r * m + col] = self.bilinear(m as f64 - 1.0 - fy, fc);
                }
            }
        }
        Image {
            size: m,
            pixels: out,
        }
    }

    /// Rotation of the function on the Hermite-zero grid the pixels map to.
    pub fn rotate_mapped(&self, theta: f64) -> Image {
        let axis = hermite_zeros(self.size).expect("image size within the zero-grid capacity");
        self.rotate_on_axis(theta, &axis)
    }

    /// Rotation by `k` counterclockwise quarter turns.
    pub fn quarter_turns(&self, k: usize) -> Image {
        let m = self.size;
        let mut cur = self.pixels.clone();
        for _ in 0..k % 4 {
            let mut next = vec![0.0; m * m];
            for r in 0..m {
                for c in 0..m {
                    next[r * m + c] = cur[c * m + (m - 1 - r)];
                }
            }
            cur = next;
        }
        Image {
            size: m,
            pixels: cur,
        }
    }

    fn bilinear(&self, r: f64, c: f64) -> f64 {
        let m = self.size as isize;
        let (r0, c0) = (r.floor(), c.floor());
        let (fr, fc) = (r - r0, c - c0);
        let (r0, c0) = (r0 as isize, c0 as isize);
        let at = |i: isize, j: isize| {
            if i < 0 || j < 0 || i >= m || j >= m {
                0.0
            } else {
                self.pixels[(i * m + j) as usize]
            }
        };
        let v = (1.0 - fr) * ((1.0 - fc) * at(r0, c0) + fc * at(r0, c0 + 1))
            + fr * ((1.0 - fc) * at(r0 + 1, c0) + fc * at(r0 + 1, c0 + 1));
        v.clamp(0.0, 1.0)
    }

    /// Adds `sigma * z` per pixel with `z` drawn from `rng`, then clamps.
    pub fn add_gaussian<R: Rng + ?Sized>(&self, sigma: f64, rng: &mut R) -> Image {
        let z: Vec<f64> = (0..self.pixels.len())
            .map(|_| rng.sample(StandardNormal))
            .collect();
        self.add_scaled_noise(sigma, &z)
    }

    /// Adds `sigma * z[k]` to pixel `k` and clamps to `[0, 1]`.
    pub fn add_scaled_noise(&self, sigma: f64, z: &[f64]) -> Image {
        let pixels = self
            .pixels
            .iter()
            .zip(z)
            .map(|(v, z)| (v + sigma * z).clamp(0.0, 1.0))
            .collect();
        Image {
            size: self.size,
            pixels,
        }
    }

    /// Replaces pixel `k` by `1 - value` when `u[k] < sigma`.
    pub fn flip_bits(&self, sigma: f64, u: &[f64]) -> Image {
        let pixels = self
            .pixels
            .iter()
            .zip(u)
            .map(|(&v, &u)| if u < sigma { 1.0 - v } else { v })
            .collect();
        Image {
            size: self.size,
            pixels,
        }
    }

    /// Binary PGM (`P5`), 8 bit.
    pub fn read_pgm<R: Read>(r: R) -> Result<Image> {
        let mut r = BufReader::new(r);
        let mut fields = Vec::new();
        let mut line = String::new();
        while fields.len() < 4 {
            line.clear();
            if r.read_line(&mut line)? == 0 {
                return Err(Error::Parse("truncated PGM header".into()));
            }
            let content = line.split('#').next().unwrap_or("");
            fields.extend(content.split_whitespace().map(str::to_owned));
        }
        if fields.len() > 4 {
            return Err(Error::Parse("unexpected data after PGM header".into()));
        }
        if fields[0] != "P5" {
            return Err(Error::Parse(format!(
                "not a binary PGM: magic {:?}",
                fields[0]
            )));
        }
        let num = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad PGM header field {s:?}")))
        };
        let (w, h, maxval) = (num(&fields[1])?, num(&fields[2])?, num(&fields[3])?);
        if w != h {
            return Err(Error::UnsupportedShape(format!(
                "{w}x{h} image is not square"
            )));
        }
        if maxval == 0 || maxval > 255 {
            return Err(Error::UnsupportedShape(format!(
                "PGM maxval {maxval} is not 8 bit"
            )));
        }
        let mut data = vec![0u8; w * h];
        r.read_exact(&mut data)
            .map_err(|_| Error::Parse("truncated PGM raster".into()))?;
        let pixels = data
            .iter()
            .map(|&v| (v as f64 / maxval as f64).min(1.0))
            .collect();
        Image::new(w, pixels)
    }

    pub fn write_pgm<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "P5\n{} {}\n255\n", self.size, self.size)?;
        let data: Vec<u8> = self
            .pixels
            .iter()
            .map(|v| (v * 255.0).round() as u8)
            .collect();
        w.write_all(&data)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Image> {
        Image::read_pgm(std::fs::File::open(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_pgm(std::io::BufWriter::new(std::fs::File::create(path)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn ramp(m: usize) -> Image {
        Image::new(
            m,
            (0..m * m)
                .map(|k| ((k * 37) % 101) as f64 / 100.0)
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn quarter_turn_moves_top_right_to_top_left() {
        let mut img = Image::blank(4);
        img.set(0, 3, 1.0);
        let r = img.rotate(PI / 2.0);
        assert_eq!(r.get(0, 0), 1.0);
        assert_eq!(r.pixels().iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn four_quarter_turns_are_identity() {
        let img = ramp(7);
        assert_eq!(img.quarter_turns(4), img);
        assert_eq!(img.rotate(2.0 * PI), img);
        assert_eq!(img.rotate(PI).rotate(PI), img);
        assert_eq!(img.rotate(-PI / 2.0), img.quarter_turns(3));
    }

    #[test]
    fn bilinear_agrees_with_quarter_turn_nearby() {
        let mut img = Image::blank(21);
        for r in 5..16 {
            for c in 8..13 {
                img.set(r, c, 1.0);
            }
        }
        let exact = img.rotate(PI / 2.0);
        let near = img.rotate(PI / 2.0 + 1e-9);
        let diff: f64 = exact
            .pixels()
            .iter()
            .zip(near.pixels())
            .map(|(a, b)| (a - b).abs())
            .sum();
        assert!(diff < 1e-6);
    }

    #[test]
    fn rotation_preserves_radial_image_roughly() {
        let m = 41;
        let cen = 20.0;
        let px = (0..m * m)
            .map(|k| {
                let (r, c) = ((k / m) as f64 - cen, (k % m) as f64 - cen);
                (-(r * r + c * c) / 60.0).exp()
            })
            .collect();
        let img = Image::new(m, px).unwrap();
        let rot = img.rotate(PI / 4.0);
        let err = img
            .pixels()
            .iter()
            .zip(rot.pixels())
            .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        assert!(err < 0.02);
    }

    #[test]
    fn pgm_roundtrip() {
        let img = Image::new(3, vec![0.0, 1.0, 0.5, 0.2, 0.8, 0.0, 1.0, 1.0, 0.0]).unwrap();
        let mut buf = Vec::new();
        img.write_pgm(&mut buf).unwrap();
        let back = Image::read_pgm(&buf[..]).unwrap();
        for (a, b) in img.pixels().iter().zip(back.pixels()) {
            assert!((a - b).abs() <= 0.5 / 255.0);
        }
        let with_comment = b"P5\n# made by hand\n2 2\n255\n\x00\xff\x80\x00";
        let img = Image::read_pgm(&with_comment[..]).unwrap();
        assert_eq!(img.get(0, 1), 1.0);
    }

    #[test]
    fn pgm_rejects_bad_input() {
        assert!(Image::read_pgm(&b"P2\n2 2\n255\n"[..]).is_err());
        assert!(matches!(
            Image::read_pgm(&b"P5\n3 2\n255\n\0\0\0\0\0\0"[..]),
            Err(Error::UnsupportedShape(_))
        ));
        assert!(Image::read_pgm(&b"P5\n2 2\n255\n\0"[..]).is_err());
        assert!(Image::read_pgm(&b"P5\n2 2\n65535\n"[..]).is_err());
    }

    #[test]
    fn full_bit_flip_inverts() {
        let img = ramp(5);
        let u: Vec<f64> = (0..25).map(|k| k as f64 / 25.0).collect();
        let flipped = img.flip_bits(1.0, &u);
        for (a, b) in img.pixels().iter().zip(flipped.pixels()) {
            assert_eq!(a + b, 1.0);
        }
        assert_eq!(img.flip_bits(0.0, &u), img);
    }

    #[test]
    fn gaussian_noise_is_clamped_and_seeded() {
        let img = ramp(6);
        let a = img.add_gaussian(0.5, &mut ChaCha8Rng::seed_from_u64(1));
        let b = img.add_gaussian(0.5, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(a, b);
        assert!(a.pixels().iter().all(|v| (0.0..=1.0).contains(v)));
        assert_eq!(
            img.add_gaussian(0.0, &mut ChaCha8Rng::seed_from_u64(2)),
            img
        );
    }

    proptest! {
        #[test]
        fn quarter_turns_preserve_mass(seed in 0u64..1000, k in 0usize..8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let px: Vec<f64> = (0..36).map(|_| rand::Rng::random::<f64>(&mut rng)).collect();
            let img = Image::new(6, px).unwrap();
            let rot = img.quarter_turns(k);
            let (a, b): (f64, f64) = (img.pixels().iter().sum(), rot.pixels().iter().sum());
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert_eq!(rot.quarter_turns(4 - k % 4), img);
        }
    }
}
