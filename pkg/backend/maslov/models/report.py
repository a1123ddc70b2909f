"""
Result records of a stability run.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional


@dataclass
class Verdicts:
    """Instability and stability conclusions drawn from P, Q and I₂."""
    jones_grillakis_unstable: bool
    vk_verdict: str
    spectrum_on_imaginary_axis: Optional[bool] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'jones_grillakis_unstable': self.jones_grillakis_unstable,
            'vk_verdict': self.vk_verdict,
            'spectrum_on_imaginary_axis': self.spectrum_on_imaginary_axis,
        }


@dataclass
class StabilityReport:
    """Everything a run concludes about one profile."""
    profile: Dict[str, Any]
    config: Dict[str, Any]
    P: int
    Q: int
    p_c: int
    q_c: int
    I1: Optional[float]
    I2: Optional[float]
    c: int
    lower_bound: int
    n_plus_N_detected: int
    verdicts: Verdicts
    consistency: Dict[str, Any] = field(default_factory=dict)
    crossings: Dict[str, Any] = field(default_factory=dict)
    essential_spectrum: Dict[str, Any] = field(default_factory=dict)
    failures: List[str] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.failures

    def headline(self) -> Dict[str, Any]:
        """The integers the robustness checks compare."""
        return {'P': self.P, 'Q': self.Q, 'c': self.c, 'lower_bound': self.lower_bound,
                'n_plus_N_detected': self.n_plus_N_detected}

    def to_dict(self) -> Dict[str, Any]:
        return {
            'profile': self.profile,
            'config': self.config,
            'P': self.P,
            'Q': self.Q,
            'p_c': self.p_c,
            'q_c': self.q_c,
            'I1': self.I1,
            'I2': self.I2,
            'c': self.c,
            'lower_bound': self.lower_bound,
            'n_plus_N_detected': self.n_plus_N_detected,
            'verdicts': self.verdicts.to_dict(),
            'consistency': self.consistency,
            'crossings': self.crossings,
            'essential_spectrum': self.essential_spectrum,
            'valid': self.valid,
            'failures': list(self.failures),
        }

    def __repr__(self) -> str:
        return f"<StabilityReport {self.profile.get('name')} P={self.P} Q={self.Q} c={self.c}>"


@dataclass(frozen=True)
class CurvePoint:
    lam: float
    x: float
    operator: str
    curve: int = 0

    def to_row(self) -> List[Any]:
        return [repr(self.lam), repr(self.x), self.operator]


@dataclass
class CurveTable:
    """(λ, x) zeros of the detection function for one operator."""
    operator: str
    points: List[CurvePoint] = field(default_factory=list)

    HEADER = ('lambda', 'x', 'operator')

    def __len__(self) -> int:
        return len(self.points)

    @property
    def curve_count(self) -> int:
        return len({p.curve for p in self.points})

    def to_dict(self) -> Dict[str, Any]:
        return {
            'operator': self.operator,
            'points': [{'lambda': p.lam, 'x': p.x, 'curve': p.curve} for p in self.points],
        }


@dataclass
class RunConfig:
    """A run as loaded from a config file and command-line flags."""
    profile: str = 'kh'
    beta: Optional[float] = None
    sigma2: Optional[int] = None
    power: Optional[int] = None
    ell: Optional[float] = None
    lambda_inf: Optional[float] = None
    epsilon: Optional[float] = None
    renorm_threshold: Optional[float] = None
    lambda_points: Optional[int] = None
    curve_lambda_points: Optional[int] = None
    curve_lambda_max: Optional[float] = None
    out: str = 'out'
    curves: bool = False
    check: bool = False
    plot: bool = True
    png: bool = False
    quiet: bool = False

    def box_overrides(self) -> Dict[str, Any]:
        return {'ell': self.ell, 'lambda_inf': self.lambda_inf, 'epsilon': self.epsilon,
                'renorm_threshold': self.renorm_threshold, 'lambda_points': self.lambda_points}

    def to_dict(self) -> Dict[str, Any]:
        return {
            'profile': self.profile,
            'beta': self.beta,
            'sigma2': self.sigma2,
            'power': self.power,
            'ell': self.ell,
            'lambda_inf': self.lambda_inf,
            'epsilon': self.epsilon,
            'renorm_threshold': self.renorm_threshold,
            'lambda_points': self.lambda_points,
            'curve_lambda_points': self.curve_lambda_points,
            'curve_lambda_max': self.curve_lambda_max,
            'out': self.out,
            'curves': self.curves,
            'check': self.check,
            'plot': self.plot,
            'png': self.png,
            'quiet': self.quiet,
        }
