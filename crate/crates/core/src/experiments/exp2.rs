use std::f64::consts::FRAC_PI_4;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::basis::BasisFamily;
use crate::collocation::{map_pixels_to_grid, CollocationMatrix, ZeroColumnPolicy};
use crate::dantzig::{DantzigSolver, SolverConfig};
use crate::error::{Error, Result};
use crate::glyphs::{glyph, GLYPH_COUNT, GLYPH_GROUPS, GLYPH_SIZE};
use crate::image::Image;
use crate::indexsets::{build, IndexSet, Shape};
use crate::moments::{
    hermite_invariants, moments_from_coefficients, InvariantVector, MomentVector,
};

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledImage {
    pub label: usize,
    /// Similarity group used for the categorized ratio.
    pub category: usize,
    pub image: Image,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    size: usize,
    images: Vec<LabeledImage>,
}

impl Dataset {
    pub fn new(images: Vec<LabeledImage>) -> Result<Self> {
        let size = images
            .first()
            .map(|i| i.image.size())
            .ok_or(Error::EmptyGrid)?;
        if let Some(bad) = images.iter().find(|i| i.image.size() != size) {
            return Err(Error::UnsupportedShape(format!(
                "image {} is {}x{}, expected {size}x{size}",
                bad.label,
                bad.image.size(),
                bad.image.size()
            )));
        }
        Ok(Dataset { size, images })
    }

    /// The seven generated glyphs, labels 1..=7, groups {1,2,3}, {4,5}, {6,7}.
    pub fn stand_in() -> Self {
        let images = (1..=GLYPH_COUNT)
            .map(|k| LabeledImage {
                label: k,
                category: GLYPH_GROUPS[k - 1],
                image: glyph(k).expect("glyph label"),
            })
            .collect();
        Dataset {
            size: GLYPH_SIZE,
            images,
        }
    }

    /// Every `*.pgm` in `dir`, sorted by file name and labelled from 1. Seven
    /// images get the groups {1,2,3}, {4,5}, {6,7}; any other count gets one
    /// group per image.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let mut paths: Vec<_> = std::fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")))
            .collect();
        paths.sort();
        if paths.is_empty() {
            return Err(Error::InvalidParameter("no .pgm files found".into()));
        }
        let k = paths.len();
        let images = paths
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let category = if k == GLYPH_COUNT { GLYPH_GROUPS[i] } else { i };
                Ok(LabeledImage {
                    label: i + 1,
                    category,
                    image: Image::load(p)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(images)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[LabeledImage] {
        &self.images
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseKind {
    WhiteGaussian,
    BitFlip,
}

impl NoiseKind {
    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::WhiteGaussian => "gauss",
            NoiseKind::BitFlip => "bitflip",
        }
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gauss" | "gaussian" | "white" => Ok(NoiseKind::WhiteGaussian),
            "bitflip" | "bit-flip" | "flip" => Ok(NoiseKind::BitFlip),
            other => Err(Error::Parse(format!("unknown noise kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(kind: NoiseKind, sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma >= 0.0) || (kind == NoiseKind::BitFlip && sigma > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "noise level {sigma} out of range"
            )));
        }
        Ok(NoiseSpec { kind, sigma, seed })
    }

    /// Noise for image `image` of trial `trial`. The random stream depends on
    /// the seed, trial and image only, so noise at different levels is
    /// coupled.
    pub fn apply(&self, img: &Image, trial: u64, image: u64) -> Image {
        if self.sigma == 0.0 {
            return img.clone();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream((trial << 20) + image);
        let n = img.pixels().len();
        match self.kind {
            NoiseKind::WhiteGaussian => {
                let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                img.add_scaled_noise(self.sigma, &z)
            }
            NoiseKind::BitFlip => {
                let u: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
                img.flip_bits(self.sigma, &u)
            }
        }
    }
}

/// Rotation angles `k pi / 4`, `k = 0..8`.
pub fn default_thetas() -> Vec<f64> {
    (0..8).map(|k| k as f64 * FRAC_PI_4).collect()
}

/// Noise levels 0 to 0.25 in steps of 0.05.
pub fn default_sigmas() -> Vec<f64> {
    vec![0.0, 0.05, 0.10, 0.15, 0.20, 0.25]
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestImage {
    pub label: usize,
    pub category: usize,
    pub theta: f64,
    pub image: Image,
}

/// Every training image rotated by every angle on its node grid, then noised.
pub fn make_testing_set(
    training: &Dataset,
    thetas: &[f64],
    noise: &NoiseSpec,
) -> Result<Vec<TestImage>> {
    make_testing_set_for_trial(training, thetas, noise, 0)
}

pub fn make_testing_set_for_trial(
    training: &Dataset,
    thetas: &[f64],
    noise: &NoiseSpec,
    trial: u64,
) -> Result<Vec<TestImage>> {
    if training.is_empty() {
        return Err(Error::InvalidParameter("training set is empty".into()));
    }
    let mut out = Vec::with_capacity(training.len() * thetas.len());
    for (i, li) in training.images().iter().enumerate() {
        for (j, &theta) in thetas.iter().enumerate() {
            let k = (i * thetas.len() + j) as u64;
            let image = noise.apply(&li.image.rotate_mapped(theta), trial, k);
            out.push(TestImage {
                label: li.label,
                category: li.category,
                theta,
                image,
            });
        }
    }
    Ok(out)
}

/// Image -> moments -> invariants, with the collocation operator and its
/// factorization shared by every image of one size.
pub struct Pipeline {
    pub shape: Shape,
    pub n: usize,
    pub config: SolverConfig,
    solver: Arc<DantzigSolver>,
    indexset: IndexSet,
    basis: BasisFamily,
    size: usize,
}

impl Pipeline {
    pub fn new(shape: Shape, n: usize, image_size: usize, config: SolverConfig) -> Result<Self> {
        let basis = BasisFamily::hermite_function(2)?;
        let indexset = build(shape, n, 2)?;
        let grid = map_pixels_to_grid(image_size, image_size)?;
        let matrix = Arc::new(CollocationMatrix::build(
            basis,
            indexset.clone(),
            grid,
            ZeroColumnPolicy::Exclude,
        )?);
        let solver = Arc::new(DantzigSolver::new(matrix)?);
        Ok(Pipeline {
            shape,
            n,
            config,
            solver,
            indexset,
            basis,
            size: image_size,
        })
    }

    /// Triangular set with `N = 20`, `delta = 1e-8`.
    pub fn standard(image_size: usize) -> Result<Self> {
        Pipeline::new(Shape::Triangular, 20, image_size, SolverConfig::default())
    }

    pub fn image_size(&self) -> usize {
        self.size
    }

    pub fn indexset(&self) -> &IndexSet {
        &self.indexset
    }

    pub fn moments(&self, img: &Image) -> Result<MomentVector> {
        if img.size() != self.size {
            return Err(Error::DimensionMismatch {
                expected: self.size,
                got: img.size(),
            });
        }
        let r = self.solver.solve_samples(img.pixels(), &self.config)?;
        moments_from_coefficients(&r, &self.indexset, &self.basis)
    }

    pub fn invariants(&self, img: &Image) -> Result<InvariantVector> {
        Ok(hermite_invariants(&self.moments(img)?))
    }
}

/// Nearest neighbour in l1 distance of invariant vectors; ties go to the
/// first training image.
pub struct Classifier {
    features: Vec<(usize, usize, InvariantVector)>,
}

impl Classifier {
    pub fn new(training: &Dataset, pipeline: &Pipeline) -> Result<Self> {
        let features = training
            .images()
            .par_iter()
            .map(|li| Ok((li.label, li.category, pipeline.invariants(&li.image)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Classifier { features })
    }

    pub fn from_features(features: Vec<(usize, usize, InvariantVector)>) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::InvalidParameter("training set is empty".into()));
        }
        Ok(Classifier { features })
    }

    pub fn features(&self) -> &[(usize, usize, InvariantVector)] {
        &self.features
    }

    /// Distances to every training image, in training order.
    pub fn distances(&self, phi: &InvariantVector) -> Vec<f64> {
        self.features
            .iter()
            .map(|(_, _, f)| f.l1_distance(phi))
            .collect()
    }

    /// `(label, category)` of the nearest training image.
    pub fn nearest(&self, phi: &InvariantVector) -> (usize, usize) {
        let d = self.distances(phi);
        let mut best = 0;
        for (k, v) in d.iter().enumerate() {
            if *v < d[best] {
                best = k;
            }
        }
        (self.features[best].0, self.features[best].1)
    }
}

pub fn classify(training: &Dataset, image: &Image, pipeline: &Pipeline) -> Result<usize> {
    let classifier = Classifier::new(training, pipeline)?;
    Ok(classifier.nearest(&pipeline.invariants(image)?).0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationReport {
    pub kind: NoiseKind,
    pub sigma: f64,
    pub trials: usize,
    pub identified_ratio: f64,
    pub categorized_ratio: f64,
    /// `confusion[i][j]`: test images of training image `i` labelled as
    /// training image `j`, summed over trials.
    pub confusion: Vec<Vec<usize>>,
    /// `(theta, identified ratio)` per rotation angle.
    pub per_theta: Vec<(f64, f64)>,
}

impl ClassificationReport {
    pub const CSV_HEADER: &'static str = "sigma,kind,identified,categorized";

    pub fn csv_row(&self) -> String {
        format!(
            "{:.2},{},{:.4},{:.4}",
            self.sigma,
            self.kind.name(),
            self.identified_ratio,
            self.categorized_ratio
        )
    }
}

/// Settings of a classification run beyond the noise.
pub struct Experiment2 {
    pub training: Dataset,
    pub pipeline: Pipeline,
    pub thetas: Vec<f64>,
}

impl Experiment2 {
    /// Stand-in glyphs, standard pipeline, eight angles.
    pub fn standard() -> Result<Self> {
        let training = Dataset::stand_in();
        let pipeline = Pipeline::standard(training.size())?;
        Ok(Experiment2 {
            training,
            pipeline,
            thetas: default_thetas(),
        })
    }

    pub fn with_training(training: Dataset) -> Result<Self> {
        let pipeline = Pipeline::standard(training.size())?;
        Ok(Experiment2 {
            training,
            pipeline,
            thetas: default_thetas(),
        })
    }

    /// One report per noise level, averaged over `trials`.
    pub fn run(
        &self,
        kind: NoiseKind,
        sigmas: &[f64],
        trials: usize,
        seed: u64,
    ) -> Result<Vec<ClassificationReport>> {
        if trials == 0 {
            return Err(Error::InvalidParameter("trials must be >= 1".into()));
        }
        let classifier = Classifier::new(&self.training, &self.pipeline)?;
        let index_of = |label: usize| {
            self.training
                .images()
                .iter()
                .position(|li| li.label == label)
                .unwrap_or(0)
        };
        let k = self.training.len();
        let nt = self.thetas.len();
        let rotated: Vec<Image> = self
            .training
            .images()
            .iter()
            .flat_map(|li| {
                self.thetas
                    .iter()
                    .map(move |&th| li.image.rotate_mapped(th))
            })
            .collect();
        sigmas
            .iter()
            .map(|&sigma| {
                let noise = NoiseSpec::new(kind, sigma, seed)?;
                // one entry per (trial, image, angle) in that order
                let jobs: Vec<(usize, usize, usize)> = (0..trials)
                    .flat_map(|t| (0..k).flat_map(move |i| (0..nt).map(move |j| (t, i, j))))
                    .collect();
                let outcomes = jobs
                    .par_iter()
                    .map(|&(t, i, j)| {
                        let img = noise.apply(&rotated[i * nt + j], t as u64, (i * nt + j) as u64);
                        let (label, category) =
                            classifier.nearest(&self.pipeline.invariants(&img)?);
                        Ok((label, category))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let mut confusion = vec![vec![0usize; k]; k];
                let mut per_theta = vec![0usize; nt];
                let (mut ident, mut categ) = (0usize, 0usize);
                for (&(_, i, j), &(label, category)) in jobs.iter().zip(&outcomes) {
                    let li = &self.training.images()[i];
                    confusion[i][index_of(label)] += 1;
                    if label == li.label {
                        ident += 1;
                        per_theta[j] += 1;
                    }
                    if category == li.category {
                        categ += 1;
                    }
                }
                let total = jobs.len() as f64;
                Ok(ClassificationReport {
                    kind,
                    sigma,
                    trials,
                    identified_ratio: ident as f64 / total,
                    categorized_ratio: categ as f64 / total,
                    confusion,
                    per_theta: self
                        .thetas
                        .iter()
                        .zip(per_theta)
                        .map(|(&th, c)| (th, c as f64 / (trials * k) as f64))
                        .collect(),
                })
            })
            .collect()
    }
}

/// Classification sweep on the stand-in glyphs with the standard pipeline.
pub fn run_experiment2(
    kind: NoiseKind,
    sigmas: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<ClassificationReport>> {
    Experiment2::standard()?.run(kind, sigmas, trials, seed)
}

/// Pairwise l1 distances between invariant vectors of two image lists.
pub fn distance_table(rows: &[InvariantVector], cols: &[InvariantVector]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|r| cols.iter().map(|c| r.l1_distance(c)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn testing_set_sizes_and_identity() {
        let train = Dataset::stand_in();
        let none = NoiseSpec::new(NoiseKind::WhiteGaussian, 0.0, 1).unwrap();
        let same = make_testing_set(&train, &[0.0], &none).unwrap();
        assert_eq!(same.len(), 7);
        for (t, li) in same.iter().zip(train.images()) {
            assert_eq!(t.image, li.image);
        }
        assert_eq!(
            make_testing_set(&train, &default_thetas(), &none)
                .unwrap()
                .len(),
            56
        );
    }

    #[test]
    fn full_bit_flip_inverts_every_pixel() {
        let train = Dataset::stand_in();
        let noise = NoiseSpec::new(NoiseKind::BitFlip, 1.0, 9).unwrap();
        let t = make_testing_set(&train, &[0.0], &noise).unwrap();
        for (a, li) in t.iter().zip(train.images()) {
            assert!(a
                .image
                .pixels()
                .iter()
                .zip(li.image.pixels())
                .all(|(x, y)| x + y == 1.0));
        }
    }

    #[test]
    fn noise_is_seeded() {
        let img = glyph(3).unwrap();
        let a = NoiseSpec::new(NoiseKind::WhiteGaussian, 0.1, 5).unwrap();
        assert_eq!(a.apply(&img, 2, 4), a.apply(&img, 2, 4));
        assert_ne!(a.apply(&img, 2, 4), a.apply(&img, 2, 5));
        assert_ne!(a.apply(&img, 2, 4), a.apply(&img, 3, 4));
        assert!(NoiseSpec::new(NoiseKind::BitFlip, 1.5, 0).is_err());
        assert!(NoiseSpec::new(NoiseKind::WhiteGaussian, -0.1, 0).is_err());
        assert_eq!("bitflip".parse::<NoiseKind>().unwrap(), NoiseKind::BitFlip);
        assert!("pink".parse::<NoiseKind>().is_err());
    }

    #[test]
    fn training_images_classify_as_themselves() {
        let train = Dataset::stand_in();
        let pipe = Pipeline::standard(train.size()).unwrap();
        let cls = Classifier::new(&train, &pipe).unwrap();
        for li in train.images() {
            let phi = pipe.invariants(&li.image.quarter_turns(1)).unwrap();
            assert_eq!(cls.nearest(&phi).0, li.label);
        }
        assert_eq!(
            classify(&train, &train.images()[4].image, &pipe).unwrap(),
            5
        );
    }

    #[test]
    fn ties_go_to_the_first_image() {
        let phi = InvariantVector { phi: [1.0; 11] };
        let cls = Classifier::from_features(vec![(4, 0, phi), (2, 1, phi)]).unwrap();
        assert_eq!(cls.nearest(&phi), (4, 0));
        assert!(Classifier::from_features(vec![]).is_err());
    }

    #[test]
    fn wrong_image_size_is_rejected() {
        let pipe = Pipeline::standard(20).unwrap();
        assert!(pipe.moments(&Image::blank(21)).is_err());
    }

    #[test]
    fn report_row_format() {
        let r = ClassificationReport {
            kind: NoiseKind::BitFlip,
            sigma: 0.1,
            trials: 1,
            identified_ratio: 0.5,
            categorized_ratio: 0.75,
            confusion: vec![],
            per_theta: vec![],
        };
        assert_eq!(r.csv_row(), "0.10,bitflip,0.5000,0.7500");
    }
}
