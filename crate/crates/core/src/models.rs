//! Constructors for the standard families of slice models.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::group::{CompactGroupModel, GroupElement, LieAlgebraBasis};
use crate::linalg;
use crate::momentum::{HamiltonianModel, ModelParts, SubgroupComponent};
use crate::symplectic::{complex_omega, standard_omega};

/// `diag(w_1 J, ..., w_n J)` on `C^n` with interleaved real coordinates.
pub fn weight_generator(weights: &[i32]) -> DMatrix<f64> {
    let blocks: Vec<_> = weights
        .iter()
        .map(|&w| LieAlgebraBasis::circle_generator() * w as f64)
        .collect();
    linalg::block_diag(&blocks)
}

fn empty_rep(nh: usize) -> (DMatrix<f64>, Vec<DMatrix<f64>>) {
    (DMatrix::zeros(0, 0), vec![DMatrix::zeros(0, 0); nh])
}

/// `G = H = T^k` acting on `C^n`; `weights[j]` is the weight of the `j`-th
/// factor, a vector of length `k`.
pub fn torus_weights(name: &str, rank: usize, weights: &[Vec<i32>]) -> Result<HamiltonianModel> {
    for w in weights {
        if w.len() != rank {
            return Err(Error::dim("weight vector", rank, w.len()));
        }
    }
    let group = CompactGroupModel::standard(rank, 0)?;
    let generators = (0..rank)
        .map(|a| weight_generator(&weights.iter().map(|w| w[a]).collect::<Vec<_>>()))
        .collect();
    HamiltonianModel::new(ModelParts {
        name: name.to_string(),
        group,
        inclusion: DMatrix::identity(rank, rank),
        omega: complex_omega(weights.len()),
        generators,
        momentum_forms: None,
        annihilator: None,
        splitting: None,
        components: Vec::new(),
    })
}

/// `G = T^k`, `H` the first `j` circle factors acting on `C^n` with the given
/// weights (each of length `j`).
pub fn subtorus(name: &str, rank: usize, sub_rank: usize, weights: &[Vec<i32>]) -> Result<HamiltonianModel> {
    if sub_rank > rank {
        return Err(Error::input("subtorus rank exceeds torus rank"));
    }
    let group = CompactGroupModel::standard(rank, 0)?;
    let inclusion = DMatrix::identity(rank, sub_rank);
    let generators = (0..sub_rank)
        .map(|a| weight_generator(&weights.iter().map(|w| w[a]).collect::<Vec<_>>()))
        .collect();
    HamiltonianModel::new(ModelParts {
        name: name.to_string(),
        group,
        inclusion,
        omega: complex_omega(weights.len()),
        generators,
        momentum_forms: None,
        annihilator: None,
        splitting: None,
        components: Vec::new(),
    })
}

/// `SU(2) x SU(2)` with the circle `t ↦ (diag(e^{iat}, e^{-iat}), diag(e^{ibt}, e^{-ibt}))`
/// and `V = C^n` with the given circle weights.
pub fn su2su2_circle_general(name: &str, a: i32, b: i32, weights: &[i32]) -> Result<HamiltonianModel> {
    let group = CompactGroupModel::standard(0, 2)?;
    let mut inc = DMatrix::zeros(6, 1);
    inc[(0, 0)] = a as f64;
    inc[(3, 0)] = b as f64;
    let (omega, generators) = if weights.is_empty() {
        empty_rep(1)
    } else {
        (complex_omega(weights.len()), vec![weight_generator(weights)])
    };
    HamiltonianModel::new(ModelParts {
        name: name.to_string(),
        group,
        inclusion: inc,
        omega,
        generators,
        momentum_forms: None,
        annihilator: None,
        splitting: None,
        components: Vec::new(),
    })
}

/// The diagonal circle in `SU(2) x SU(2)` with `V = 0`, in slice coordinates
/// `(θ, Re z1, Im z1, Re z2, Im z2)`: the point `(θ, z1, z2)` is the pair
/// `([[iθ, -z̄1], [z1, -iθ]], [[-iθ, -z̄2], [z2, iθ]])`.
pub fn su2su2_circle() -> Result<HamiltonianModel> {
    let group = CompactGroupModel::standard(0, 2)?;
    let mut inc = DMatrix::zeros(6, 1);
    inc[(0, 0)] = 1.0;
    inc[(3, 0)] = 1.0;
    // [[iθ, -z̄], [z, -iθ]] = θ e1 + Re z e2 + Im z e3
    let mut ann = DMatrix::zeros(6, 5);
    ann[(0, 0)] = 1.0;
    ann[(3, 0)] = -1.0;
    ann[(1, 1)] = 1.0;
    ann[(2, 2)] = 1.0;
    ann[(4, 3)] = 1.0;
    ann[(5, 4)] = 1.0;
    let (omega, generators) = empty_rep(1);
    HamiltonianModel::new(ModelParts {
        name: "su2su2_circle".to_string(),
        group,
        inclusion: inc,
        omega,
        generators,
        momentum_forms: None,
        annihilator: Some(ann),
        splitting: None,
        components: Vec::new(),
    })
}

/// `G = SU(2)`, `H` its maximal torus, `V = C` with the given weight.
pub fn su2_torus_slice(name: &str, weight: i32) -> Result<HamiltonianModel> {
    let group = CompactGroupModel::standard(0, 1)?;
    let mut inc = DMatrix::zeros(3, 1);
    inc[(0, 0)] = 1.0;
    HamiltonianModel::new(ModelParts {
        name: name.to_string(),
        group,
        inclusion: inc,
        omega: complex_omega(1),
        generators: vec![weight_generator(&[weight])],
        momentum_forms: None,
        annihilator: None,
        splitting: None,
        components: Vec::new(),
    })
}

/// `G = H = SU(2)` on `C^2 = R^4` by its defining representation.
pub fn su2_quaternion(name: &str) -> Result<HamiltonianModel> {
    let group = CompactGroupModel::standard(0, 1)?;
    HamiltonianModel::new(ModelParts {
        name: name.to_string(),
        group,
        inclusion: DMatrix::identity(3, 3),
        omega: standard_omega(2),
        generators: LieAlgebraBasis::su2_generators(),
        momentum_forms: None,
        annihilator: None,
        splitting: None,
        components: Vec::new(),
    })
}

/// `G = O(2) = S^1 ⋊ Z/2`, `H` trivial, `V = 0`. The slice is `g* = R` with the
/// reflection acting by `-1`.
pub fn o2_reflection(name: &str) -> Result<HamiltonianModel> {
    let alg = LieAlgebraBasis::standard(1, 0)?;
    let refl = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
    let group = CompactGroupModel::new(alg, vec![refl], None)?;
    let (omega, generators) = empty_rep(0);
    HamiltonianModel::new(ModelParts {
        name: name.to_string(),
        group,
        inclusion: DMatrix::zeros(1, 0),
        omega,
        generators,
        momentum_forms: None,
        annihilator: None,
        splitting: None,
        components: Vec::new(),
    })
}

/// `G = H = O(2)` acting on `T*R^2 = R^2 ⊕ R^2` by cotangent lift, with
/// coordinates `(q1, q2, p1, p2)` and the standard form.
pub fn o2_cotangent(name: &str) -> Result<HamiltonianModel> {
    let alg = LieAlgebraBasis::standard(1, 0)?;
    let refl = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
    let group = CompactGroupModel::new(alg, vec![refl.clone()], None)?;
    let j = LieAlgebraBasis::circle_generator();
    HamiltonianModel::new(ModelParts {
        name: name.to_string(),
        group,
        inclusion: DMatrix::identity(1, 1),
        omega: standard_omega(2),
        generators: vec![linalg::block_diag(&[j.clone(), j])],
        momentum_forms: None,
        annihilator: None,
        splitting: None,
        components: vec![SubgroupComponent {
            in_group: GroupElement { matrix: refl.clone() },
            on_rep: linalg::block_diag(&[refl.clone(), refl]),
        }],
    })
}

/// A model drawn from the supported families, reproducible from `seed`.
pub fn random_supported_model(seed: u64) -> Result<HamiltonianModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let family = rng.random_range(0..5);
    let name = format!("random-{seed}");
    let mut w = |lo: i32, hi: i32| rng.random_range(lo..=hi);
    match family {
        0 => {
            let rank = 1 + (w(0, 1) as usize);
            let n = 1 + (w(0, 2) as usize);
            let weights: Vec<Vec<i32>> = (0..n).map(|_| (0..rank).map(|_| w(-2, 2)).collect()).collect();
            torus_weights(&name, rank, &weights)
        }
        1 => {
            let n = 1 + (w(0, 2) as usize);
            let weights: Vec<Vec<i32>> = (0..n).map(|_| vec![w(-2, 2)]).collect();
            subtorus(&name, 2, 1, &weights)
        }
        2 => su2_torus_slice(&name, w(-2, 2)),
        3 => {
            if w(0, 1) == 0 {
                su2_quaternion(&name)
            } else {
                let weights: Vec<i32> = (0..w(0, 1)).map(|_| w(-2, 2)).collect();
                let (a, b) = [(1, 1), (1, 0), (1, 2), (2, 1)][w(0, 3) as usize];
                su2su2_circle_general(&name, a, b, &weights)
            }
        }
        _ => {
            let (a, b) = [(1, 1), (1, 0), (1, 2)][w(0, 2) as usize];
            let weights: Vec<i32> = (0..w(0, 2)).map(|_| w(-2, 2)).collect();
            su2su2_circle_general(&name, a, b, &weights)
        }
    }
}

/// Evaluation point helper: slice coordinates from `(α, v)` slices.
pub fn point(coords: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(coords)
}
