//! Linearized swing-equation model.
//!
//! State ordering is `[δ_1, ω_1, δ_2, ω_2, …]` with absolute rotor angles, so
//! `n = 2·#generators`. For machine `i`
//!
//! ```text
//! δ̇_i = ω_i
//! M_i ω̇_i = −D_i ω_i − Σ_j K_ij (δ_i − δ_j) + u_i
//! ```
//!
//! where `K_ij = b_ij cos(δ0_i − δ0_j)` and `b_ij` is the coupling
//! susceptance between machines after Kron-reducing all non-generator buses.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::grid::scenario::{ContingencyClass, ScenarioModel};
use crate::grid::spec::{GridSpec, SensedState};
use crate::linalg::Mat;

/// Kron-reduced susceptance Laplacian between generator buses (generator
/// order), with the lines in `out_lines` removed.
pub fn kron_reduce(grid: &GridSpec, out_lines: &BTreeSet<usize>) -> Result<Mat> {
    let index: BTreeMap<usize, usize> = grid
        .buses
        .iter()
        .enumerate()
        .map(|(i, &b)| (b, i))
        .collect();
    let nb = grid.buses.len();
    let mut lap = Mat::zeros(nb, nb);
    for (k, line) in grid.lines.iter().enumerate() {
        if out_lines.contains(&k) {
            continue;
        }
        let (i, j) = (index[&line.from], index[&line.to]);
        lap[(i, i)] += line.susceptance;
        lap[(j, j)] += line.susceptance;
        lap[(i, j)] -= line.susceptance;
        lap[(j, i)] -= line.susceptance;
    }

    let gens: Vec<usize> = grid.generators.iter().map(|g| index[&g.bus]).collect();
    let gen_set: BTreeSet<usize> = gens.iter().copied().collect();
    let loads: Vec<usize> = (0..nb).filter(|i| !gen_set.contains(i)).collect();

    let ng = gens.len();
    let l_gg = Mat::from_fn(ng, ng, |i, j| lap[(gens[i], gens[j])]);
    if loads.is_empty() {
        return Ok(l_gg);
    }
    let nl = loads.len();
    let l_gl = Mat::from_fn(ng, nl, |i, j| lap[(gens[i], loads[j])]);
    let l_ll = Mat::from_fn(nl, nl, |i, j| lap[(loads[i], loads[j])]);
    let chol = l_ll.cholesky().ok_or_else(|| {
        Error::SingularNetwork("a group of load buses has no path to any generator".into())
    })?;
    let x = chol.solve(&l_gl.transpose());
    Ok(l_gg - &l_gl * x)
}

/// Assembles (A, B, C) from a reduced Laplacian.
fn assemble(grid: &GridSpec, reduced: &Mat) -> (Mat, Mat, Mat) {
    let ng = grid.generators.len();
    let n = 2 * ng;
    let mut a = Mat::zeros(n, n);
    let mut b = Mat::zeros(n, ng);
    for (i, gi) in grid.generators.iter().enumerate() {
        let (d, w) = (2 * i, 2 * i + 1);
        a[(d, w)] = 1.0;
        a[(w, w)] = -gi.damping / gi.inertia;
        b[(w, i)] = 1.0 / gi.inertia;
        for (j, gj) in grid.generators.iter().enumerate() {
            if i == j {
                continue;
            }
            let coupling = -reduced[(i, j)] * (gi.angle - gj.angle).cos();
            if coupling == 0.0 {
                continue;
            }
            a[(w, d)] -= coupling / gi.inertia;
            a[(w, 2 * j)] += coupling / gi.inertia;
        }
    }
    let mut c = Mat::zeros(grid.sensors.len(), n);
    for (row, s) in grid.sensors.iter().enumerate() {
        let col = 2 * s.generator
            + match s.state {
                SensedState::Angle => 0,
                SensedState::Speed => 1,
            };
        c[(row, col)] = 1.0;
    }
    (a, b, c)
}

/// Nominal (Normal-class, id 0) model of the intact grid.
pub fn build_nominal_model(grid: &GridSpec) -> Result<ScenarioModel> {
    grid.validate()?;
    let reduced = kron_reduce(grid, &BTreeSet::new())?;
    let (a, b, c) = assemble(grid, &reduced);
    Ok(ScenarioModel {
        id: 0,
        class: ContingencyClass::Normal,
        a,
        b,
        c,
        description: "normal operation".into(),
        islanded: false,
    })
}

/// Physical scenario with the given lines (indices into `grid.lines`) out of
/// service. B and C are the nominal ones. A disconnected residual network is
/// flagged via `islanded`; a load island without any generator is an error.
pub fn apply_line_outage(grid: &GridSpec, out_lines: &BTreeSet<usize>) -> Result<ScenarioModel> {
    grid.validate()?;
    if let Some(&bad) = out_lines.iter().find(|&&l| l >= grid.lines.len()) {
        return Err(Error::IndexOutOfRange {
            what: "line",
            index: bad,
            len: grid.lines.len(),
        });
    }
    let reduced = kron_reduce(grid, out_lines)?;
    let (a, b, c) = assemble(grid, &reduced);
    let islanded = grid.islands(out_lines).len() > 1;
    let names: Vec<String> = out_lines
        .iter()
        .map(|&l| format!("{}-{}", grid.lines[l].from, grid.lines[l].to))
        .collect();
    let description = if names.is_empty() {
        "no lines out".to_string()
    } else {
        format!("line {} out", names.join(", "))
    };
    Ok(ScenarioModel {
        id: 0,
        class: if out_lines.is_empty() {
            ContingencyClass::Normal
        } else {
            ContingencyClass::Physical
        },
        a,
        b,
        c,
        description,
        islanded,
    })
}

/// Rewrites A in angles relative to machine 1, `z = [ω_1, δ_2−δ_1, ω_2, …]`,
/// removing the rigid-body rotation mode. Size `2g − 1`.
pub fn relative_angle_model(a: &Mat) -> Mat {
    let n = a.nrows();
    let g = n / 2;
    // z = T x
    let mut t = Mat::zeros(n - 1, n);
    // x = R z (with δ_1 = 0)
    let mut r = Mat::zeros(n, n - 1);
    t[(0, 1)] = 1.0;
    r[(1, 0)] = 1.0;
    for i in 1..g {
        let (theta, omega) = (2 * i - 1, 2 * i);
        t[(theta, 2 * i)] = 1.0;
        t[(theta, 0)] = -1.0;
        t[(omega, 2 * i + 1)] = 1.0;
        r[(2 * i, theta)] = 1.0;
        r[(2 * i + 1, omega)] = 1.0;
    }
    t * a * r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::spec::{Generator, Line, Sensor};
    use crate::linalg::eigenvalues;

    fn gen(bus: usize) -> Generator {
        Generator {
            bus,
            inertia: 1.0,
            damping: 0.1,
            angle: 0.0,
        }
    }

    fn two_machine() -> GridSpec {
        GridSpec {
            name: "two".into(),
            buses: vec![1, 2],
            lines: vec![Line {
                from: 1,
                to: 2,
                susceptance: 1.0,
            }],
            generators: vec![gen(1), gen(2)],
            sensors: vec![Sensor {
                generator: 0,
                state: SensedState::Angle,
            }],
        }
    }

    /// Kron reduction by eliminating one load bus at a time.
    fn reduce_one_by_one(grid: &GridSpec, out: &BTreeSet<usize>) -> Mat {
        let nb = grid.buses.len();
        let pos = |bus: usize| grid.buses.iter().position(|&b| b == bus).unwrap();
        let mut y = vec![vec![0.0; nb]; nb];
        for (k, l) in grid.lines.iter().enumerate() {
            if out.contains(&k) {
                continue;
            }
            let (i, j) = (pos(l.from), pos(l.to));
            y[i][i] += l.susceptance;
            y[j][j] += l.susceptance;
            y[i][j] -= l.susceptance;
            y[j][i] -= l.susceptance;
        }
        let gens: Vec<usize> = grid.generators.iter().map(|g| pos(g.bus)).collect();
        let mut alive: Vec<bool> = vec![true; nb];
        for p in 0..nb {
            if gens.contains(&p) {
                continue;
            }
            let pivot = y[p][p];
            for i in 0..nb {
                for j in 0..nb {
                    if i != p && j != p && alive[i] && alive[j] {
                        y[i][j] -= y[i][p] * y[p][j] / pivot;
                    }
                }
            }
            alive[p] = false;
        }
        Mat::from_fn(gens.len(), gens.len(), |i, j| y[gens[i]][gens[j]])
    }

    #[test]
    fn two_machine_spectrum() {
        let m = build_nominal_model(&two_machine()).unwrap();
        let eig = eigenvalues(&m.a).unwrap();
        // independent characteristic-polynomial roots: s(s+0.1) and s^2+0.1s+2
        let im = (2.0f64 - 0.0025).sqrt();
        let expected = [(-0.1, 0.0), (-0.05, -im), (-0.05, im), (0.0, 0.0)];
        for (z, (re, imv)) in eig.iter().zip(expected) {
            assert!((z.re - re).abs() < 1e-10 && (z.im - imv).abs() < 1e-10, "{z}");
        }
        assert!((im - 2f64.sqrt()).abs() < 1e-3);
    }

    #[test]
    fn single_machine() {
        let grid = GridSpec {
            name: "one".into(),
            buses: vec![1],
            lines: vec![],
            generators: vec![Generator {
                bus: 1,
                inertia: 4.0,
                damping: 0.2,
                angle: 0.0,
            }],
            sensors: vec![],
        };
        let m = build_nominal_model(&grid).unwrap();
        assert_eq!(m.a, Mat::from_row_slice(2, 2, &[0.0, 1.0, 0.0, -0.05]));
        assert_eq!(m.b, Mat::from_row_slice(2, 1, &[0.0, 0.25]));
    }

    #[test]
    fn sensor_selects_state() {
        let m = build_nominal_model(&two_machine()).unwrap();
        assert_eq!(m.c, Mat::from_row_slice(1, 4, &[1.0, 0.0, 0.0, 0.0]));
    }

    #[test]
    fn empty_outage_is_nominal() {
        let grid = GridSpec::desk();
        let nom = build_nominal_model(&grid).unwrap();
        let s = apply_line_outage(&grid, &BTreeSet::new()).unwrap();
        assert_eq!(s.a, nom.a);
    }

    #[test]
    fn only_line_outage_islands() {
        let s = apply_line_outage(&two_machine(), &BTreeSet::from([0])).unwrap();
        assert!(s.islanded);
        assert_eq!(s.class, ContingencyClass::Physical);
    }

    #[test]
    fn isolated_load_bus_is_singular() {
        let mut grid = two_machine();
        grid.buses.push(3);
        grid.lines.push(Line {
            from: 2,
            to: 3,
            susceptance: 2.0,
        });
        assert!(matches!(
            apply_line_outage(&grid, &BTreeSet::from([1])),
            Err(Error::SingularNetwork(_))
        ));
    }

    #[test]
    fn kron_reduction_matches_sequential_elimination() {
        let grid = GridSpec::desk();
        for out in [BTreeSet::new(), BTreeSet::from([3]), BTreeSet::from([5, 11])] {
            let block = kron_reduce(&grid, &out).unwrap();
            let seq = reduce_one_by_one(&grid, &out);
            assert!((block - seq).amax() < 1e-10);
        }
    }

    #[test]
    fn generator_line_outage_touches_only_incident_rows() {
        let grid = GridSpec::desk();
        // line 0 joins buses 1 and 2, machines 0 and 1
        assert_eq!((grid.lines[0].from, grid.lines[0].to), (1, 2));
        let nom = build_nominal_model(&grid).unwrap();
        let out = apply_line_outage(&grid, &BTreeSet::from([0])).unwrap();
        // expected difference from an independently reduced network
        let before = reduce_one_by_one(&grid, &BTreeSet::new());
        let after = reduce_one_by_one(&grid, &BTreeSet::from([0]));
        let diff = &out.a - &nom.a;
        for r in 0..diff.nrows() {
            for c in 0..diff.ncols() {
                let touched = (r == 1 || r == 3) && (c == 0 || c == 2);
                if touched {
                    let (i, j) = (r / 2, c / 2);
                    let gi = &grid.generators[i];
                    let cos = |a: usize, b: usize| {
                        (grid.generators[a].angle - grid.generators[b].angle).cos()
                    };
                    let k = |m: &Mat, a: usize, b: usize| -m[(a, b)] * cos(a, b);
                    let other = 1 - i;
                    let expected = if i == j {
                        -(k(&after, i, other) - k(&before, i, other)) / gi.inertia
                    } else {
                        (k(&after, i, other) - k(&before, i, other)) / gi.inertia
                    };
                    assert!((diff[(r, c)] - expected).abs() < 1e-10);
                    assert!(diff[(r, c)].abs() > 0.0);
                } else {
                    assert_eq!(diff[(r, c)], 0.0, "entry ({r},{c})");
                }
            }
        }
        assert_eq!(out.b, nom.b);
        assert_eq!(out.c, nom.c);
    }

    #[test]
    fn relative_angles_remove_zero_mode() {
        for grid in [GridSpec::desk(), GridSpec::desk_seeded(3)] {
            let nom = build_nominal_model(&grid).unwrap();
            let full = eigenvalues(&nom.a).unwrap();
            assert!(full.iter().any(|z| z.norm() < 1e-9));
            assert!(full.iter().all(|z| z.re <= 1e-9));
            let rel = eigenvalues(&relative_angle_model(&nom.a)).unwrap();
            assert_eq!(rel.len(), nom.a.nrows() - 1);
            assert!(rel.iter().all(|z| z.re < 0.0), "{rel:?}");
        }
    }
}
