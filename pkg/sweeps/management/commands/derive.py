from sweeps.cli import SimulationCommand
from sweeps.pipeline import DERIVED_FIELDS


class Command(SimulationCommand):
    help = 'Derive omega_c, kappa_0, Gamma, G0, drive amplitudes and n_m (all rad/s) from a config'

    def run(self, options):
        config = self.load(options)
        derived = config.derive()
        row = {name: getattr(derived, name) for name in DERIVED_FIELDS}
        row['J_over_Gamma'] = derived.J_over_Gamma
        row['detuning_ratio'] = derived.detuning_ratio
        row['theta'] = config.drive.theta
        self.emit([row], self.provenance(config, derived.notes), options)
