//! Bring-up oracle for the recoupling data: contract explicit U_Q(sl2)
//! coupled tensors at the level-2 root of unity and compare the recoupling
//! matrix of four spin-1/2 objects against `elementary_duality`.
//!
//! Three legs suffice: the duality block with boundary `(a, b, c, d)` is the
//! change of basis between `((ab)_x c)` and `(a (bc)_y)` at total spin `d`.
//! The test builds the coupled highest-weight tensors of both bases from
//! single-site ladder operators and iterated coproducts (deformation
//! parameter `Q = q^(1/2)`, so `[2] = Q + Q⁻¹ = √2 ≠ 0 at k = 2`), solves
//! the change of pairing as a linear system, and compares through the
//! cross-ratio `C₀₀·C₁₁/(C₀₁·C₁₀)` — invariant under every normalization
//! choice. For this block the value is `-1/[3]`.
//!
//! No code is shared with the recoupling path.

use platjones_core::qarith::{qint, Cplx, Level, Spin};
use platjones_core::recoupling::elementary_duality;

const TOL: f64 = 1e-9;

fn c(re: f64, im: f64) -> Cplx {
    Cplx::new(re, im)
}

type Mat = Vec<Vec<Cplx>>;

fn zeros(rows: usize, cols: usize) -> Mat {
    vec![vec![c(0.0, 0.0); cols]; rows]
}

fn kron(a: &Mat, b: &Mat) -> Mat {
    let (ar, ac, br, bc) = (a.len(), a[0].len(), b.len(), b[0].len());
    let mut out = zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            for k in 0..br {
                for l in 0..bc {
                    out[i * br + k][j * bc + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

fn apply(m: &Mat, v: &[Cplx]) -> Vec<Cplx> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, x)| a * x).sum())
        .collect()
}

fn add_assign(a: &mut Mat, b: &Mat) {
    for i in 0..a.len() {
        for j in 0..a[0].len() {
            a[i][j] += b[i][j];
        }
    }
}

/// Solve the consistent overdetermined system `A x = b` through the normal
/// equations and verify the residual vanishes.
fn solve_exact(a: &Mat, b: &[Cplx]) -> Vec<Cplx> {
    let cols = a[0].len();
    let mut gram = zeros(cols, cols);
    let mut rhs = vec![c(0.0, 0.0); cols];
    for i in 0..a.len() {
        for p in 0..cols {
            rhs[p] += a[i][p].conj() * b[i];
            for q in 0..cols {
                let inc = a[i][p].conj() * a[i][q];
                gram[p][q] += inc;
            }
        }
    }
    let mut m = gram;
    let mut x = rhs;
    let n = cols;
    for col in 0..n {
        let mut best = col;
        for i in col..n {
            if m[i][col].norm() > m[best][col].norm() {
                best = i;
            }
        }
        m.swap(col, best);
        x.swap(col, best);
        let inv = c(1.0, 0.0) / m[col][col];
        for j in 0..n {
            m[col][j] *= inv;
        }
        x[col] *= inv;
        for i in 0..n {
            if i != col {
                let f = m[i][col];
                for j in 0..n {
                    let sub = f * m[col][j];
                    m[i][j] -= sub;
                }
                let sub = f * x[col];
                x[i] -= sub;
            }
        }
    }
    for i in 0..a.len() {
        let fit: Cplx = a[i].iter().zip(&x).map(|(m, v)| m * v).sum();
        assert!((fit - b[i]).norm() <= 1e-9, "system must be consistent");
    }
    x
}

#[test]
fn qcg_contraction_pins_recoupling_cross_ratio() {
    // level 2: q = i, deformation parameter Q = q^(1/2) = exp(iπ/4)
    let big_q = c(std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2);

    // single-site operators on V_{1/2}, basis (|↑⟩, |↓⟩), K = Q^H
    let zero = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let e1: Mat = vec![vec![zero, one], vec![zero, zero]];
    let f1: Mat = vec![vec![zero, zero], vec![one, zero]];
    let k1: Mat = vec![vec![big_q, zero], vec![zero, big_q.conj()]];
    let k1_inv: Mat = vec![vec![big_q.conj(), zero], vec![zero, big_q]];
    let id: Mat = vec![vec![one, zero], vec![zero, one]];

    // iterated coproducts Δ(E) = E⊗K + 1⊗E, Δ(F) = F⊗1 + K⁻¹⊗F
    let raising = |n: usize| -> Mat {
        let mut total = zeros(1 << n, 1 << n);
        for site in 0..n {
            let mut term: Mat = vec![vec![one]];
            for pos in 0..n {
                let factor = if pos < site {
                    &id
                } else if pos == site {
                    &e1
                } else {
                    &k1
                };
                term = kron(&term, factor);
            }
            add_assign(&mut total, &term);
        }
        total
    };
    let lowering = |n: usize| -> Mat {
        let mut total = zeros(1 << n, 1 << n);
        for site in 0..n {
            let mut term: Mat = vec![vec![one]];
            for pos in 0..n {
                let factor = if pos < site {
                    &k1_inv
                } else if pos == site {
                    &f1
                } else {
                    &id
                };
                term = kron(&term, factor);
            }
            add_assign(&mut total, &term);
        }
        total
    };

    let e2 = raising(2);
    let f2 = lowering(2);
    let e3 = raising(3);

    // the pair singlet: weight-0 kernel of Δ(E), solved by hand-free
    // elimination of the 2-dim weight-0 block {|↑↓⟩, |↓↑⟩}
    let up_down = {
        let mut v = vec![zero; 4];
        v[0b01] = one;
        v
    };
    let down_up = {
        let mut v = vec![zero; 4];
        v[0b10] = one;
        v
    };
    let img_ud = apply(&e2, &up_down);
    let img_du = apply(&e2, &down_up);
    // both images are multiples of |↑↑⟩; cancel them
    let alpha = img_ud[0b00];
    let beta = img_du[0b00];
    assert!(alpha.norm() > 0.1 && beta.norm() > 0.1);
    let singlet: Vec<Cplx> = up_down
        .iter()
        .zip(&down_up)
        .map(|(u, d)| beta * u - alpha * d)
        .collect();
    assert!(apply(&e2, &singlet).iter().all(|z| z.norm() <= 1e-12));

    // pair triplet: |↑↑⟩ and its lowering orbit (nonzero at this root)
    let t_plus = {
        let mut v = vec![zero; 4];
        v[0b00] = one;
        v
    };
    let t_zero = apply(&f2, &t_plus);
    assert!(t_zero.iter().any(|z| z.norm() > 0.1));
    assert!(apply(&f2, &t_zero).iter().any(|z| z.norm() > 0.1), "[2] must not vanish");

    // embed a pair vector on legs (1,2) or (2,3) of V^{⊗3}
    let on_left = |pair: &[Cplx], third: usize| -> Vec<Cplx> {
        let mut v = vec![zero; 8];
        for ij in 0..4 {
            v[(ij << 1) | third] = pair[ij];
        }
        v
    };
    let on_right = |first: usize, pair: &[Cplx]| -> Vec<Cplx> {
        let mut v = vec![zero; 8];
        for ij in 0..4 {
            v[(first << 2) | ij] = pair[ij];
        }
        v
    };

    // ((ab)_x c) tensors at total spin 1/2, highest weight (+1):
    //   x = 0:  s ⊗ |↑⟩ (exactly annihilated by Δ³(E))
    //   x = 1:  kernel combination of t₊⊗|↓⟩ and t₀⊗|↑⟩
    let t0_tensor = on_left(&singlet, 0);
    assert!(apply(&e3, &t0_tensor).iter().all(|z| z.norm() <= 1e-12));
    let t1_tensor = {
        let v1 = on_left(&t_plus, 1);
        let v2 = on_left(&t_zero, 0);
        kernel_combination(&e3, &v1, &v2)
    };

    // (a (bc)_y) tensors
    let y0_tensor = on_right(0, &singlet);
    assert!(apply(&e3, &y0_tensor).iter().all(|z| z.norm() <= 1e-12));
    let y1_tensor = {
        let v1 = on_right(1, &t_plus);
        let v2 = on_right(0, &t_zero);
        kernel_combination(&e3, &v1, &v2)
    };

    // change of pairing: T_x = Σ_y C[y][x] Y_y
    let mut columns = zeros(8, 2);
    for i in 0..8 {
        columns[i][0] = y0_tensor[i];
        columns[i][1] = y1_tensor[i];
    }
    let c0 = solve_exact(&columns, &t0_tensor);
    let c1 = solve_exact(&columns, &t1_tensor);
    let cross_ratio = (c0[0] * c1[1]) / (c0[1] * c1[0]);

    // the implementation's block for boundary (1/2, 1/2, 1/2, 1/2) at k=2
    let level = Level::new(2);
    let h = Spin::HALF;
    let block = elementary_duality(level, h, h, h, h).unwrap();
    let f = &block.entries;
    let impl_ratio = (f[(0, 0)] * f[(1, 1)]) / (f[(0, 1)] * f[(1, 0)]);

    assert!(
        (cross_ratio - impl_ratio).norm() <= TOL,
        "contraction gives {cross_ratio}, implementation gives {impl_ratio}"
    );
    let expected = -1.0 / qint(level, 3).unwrap();
    assert!(
        (cross_ratio - c(expected, 0.0)).norm() <= TOL,
        "cross-ratio {cross_ratio} differs from -1/[3] = {expected}"
    );
}

/// The (unique up to scale) kernel combination `α v1 + β v2` of a raising
/// operator, for two vectors whose images are parallel.
fn kernel_combination(e: &Mat, v1: &[Cplx], v2: &[Cplx]) -> Vec<Cplx> {
    let img1 = apply(e, v1);
    let img2 = apply(e, v2);
    // find a coordinate where the images are visible
    let pivot = (0..img1.len())
        .max_by(|&a, &b| {
            (img1[a].norm() + img2[a].norm())
                .partial_cmp(&(img1[b].norm() + img2[b].norm()))
                .unwrap()
        })
        .unwrap();
    let (alpha, beta) = (img2[pivot], -img1[pivot]);
    assert!(alpha.norm() > 1e-9 || beta.norm() > 1e-9);
    let combo: Vec<Cplx> = v1
        .iter()
        .zip(v2)
        .map(|(a, b)| alpha * a + beta * b)
        .collect();
    let residual = apply(e, &combo);
    assert!(
        residual.iter().all(|z| z.norm() <= 1e-9),
        "combination must be a highest-weight vector"
    );
    combo
}
