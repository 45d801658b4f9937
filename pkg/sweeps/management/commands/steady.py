from optomech.steady_state import solve_steady_state
from sweeps.cli import SimulationCommand


class Command(SimulationCommand):
    help = 'Solve the self-consistent classical steady state (alpha_cw, alpha_ccw, q_s)'

    def run(self, options):
        config = self.load(options)
        derived = config.derive()
        state = solve_steady_state(derived, config.system, config.drive, config.solver)
        row = {
            'alpha_cw_re': state.alpha_cw.real,
            'alpha_cw_im': state.alpha_cw.imag,
            'alpha_ccw_re': state.alpha_ccw.real,
            'alpha_ccw_im': state.alpha_ccw.imag,
            'photons_cw': state.photons_cw,
            'photons_ccw': state.photons_ccw,
            'q_s': state.q_s,
            'p_s': state.p_s,
            'delta_eff': state.delta_eff,
            'residual': state.residual,
            'iterations': state.iterations,
            'method': state.method,
        }
        notes = list(derived.notes) + list(state.warnings)
        provenance = self.provenance(config, notes)
        if state.roots:
            provenance['roots'] = list(state.roots)
        self.emit([row], provenance, options)
