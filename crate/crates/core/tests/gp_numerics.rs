use socsqueeze::gp_solver::{
    build_problem, imaginary_time_ground_state, read_checkpoint, write_checkpoint, GpConfig, GpProblem, Grid,
    InteractionConfig, TrapConfig,
};
use socsqueeze::ModelParams;

fn cigar(points: usize) -> GpProblem {
    let trap = TrapConfig {
        omega_x: 5000.0,
        omega_y: 5000.0,
        omega_z: 1500.0,
        recoil_frequency: 23116.0,
    };
    build_problem(
        &ModelParams::new(2.0, 1.0, 6.0, 100_000),
        &trap,
        &InteractionConfig::rb87(100_000),
        Grid::uniform(1, points, 120.0).unwrap(),
    )
    .unwrap()
}

#[test]
fn energy_stable_under_grid_refinement() {
    let cfg = GpConfig {
        dt: 0.01,
        tol: 1e-10,
        ..GpConfig::default()
    };
    let coarse = imaginary_time_ground_state(&cigar(256), &cfg).unwrap();
    let fine = imaginary_time_ground_state(&cigar(512), &cfg).unwrap();
    let rel = (coarse.energy - fine.energy).abs() / fine.energy.abs();
    assert!(rel < 0.01, "relative energy change {rel:.3e}");
    let (pc, pf) = (coarse.field.populations(), fine.field.populations());
    assert!((pc.rho_0 - pf.rho_0).abs() < 1e-3);
}

#[test]
fn checkpoint_preserves_field_bitwise() {
    let problem = cigar(128);
    let field = problem.initial_field(11);
    let mut bytes = Vec::new();
    write_checkpoint(&field, &mut bytes).unwrap();
    let back = read_checkpoint(bytes.as_slice()).unwrap();
    assert_eq!(back.grid, field.grid);
    for c in 0..3 {
        assert!(back.psi[c]
            .iter()
            .zip(&field.psi[c])
            .all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits()));
    }
    assert!(read_checkpoint(&bytes[..bytes.len() - 8]).is_err());
    let mut corrupt = bytes.clone();
    corrupt[0] = b'X';
    assert!(read_checkpoint(corrupt.as_slice()).is_err());
}
