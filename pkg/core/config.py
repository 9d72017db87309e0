"""
Run configuration for computations and command output
"""
from dataclasses import dataclass, replace
from typing import Optional

from django.conf import settings
from django.core.exceptions import ImproperlyConfigured

OUTPUT_FORMATS = ('text', 'csv', 'json')


@dataclass(frozen=True)
class Config:
    """Precision, counting and grid caps, output format and seed for one run"""
    tol: float = 1e-12
    n_max: int = 5000
    output_format: str = 'text'
    seed: int = 20240601
    workers: int = 4
    max_grid: int = 200

    def __post_init__(self):
        if not self.tol > 0:
            raise ImproperlyConfigured(f"tol must be positive, got {self.tol}")
        if self.n_max < 10:
            raise ImproperlyConfigured(f"n_max must be at least 10, got {self.n_max}")
        if self.output_format not in OUTPUT_FORMATS:
            raise ImproperlyConfigured(
                f"output format must be one of {', '.join(OUTPUT_FORMATS)}, got {self.output_format!r}"
            )
        if self.workers < 1:
            raise ImproperlyConfigured(f"workers must be at least 1, got {self.workers}")
        if self.max_grid < 1:
            raise ImproperlyConfigured(f"max_grid must be at least 1, got {self.max_grid}")

    @classmethod
    def from_settings(cls) -> 'Config':
        values = getattr(settings, 'BETAFREQ', {})
        return cls(
            tol=values.get('TOL', cls.tol),
            n_max=values.get('N_MAX', cls.n_max),
            output_format=values.get('FORMAT', cls.output_format),
            seed=values.get('SEED', cls.seed),
            workers=values.get('WORKERS', cls.workers),
            max_grid=values.get('MAX_GRID', cls.max_grid),
        )

    def override(
        self,
        tol: Optional[float] = None,
        output_format: Optional[str] = None,
        seed: Optional[int] = None,
        n_max: Optional[int] = None,
        workers: Optional[int] = None,
    ) -> 'Config':
        """Copy with the given (non-None) values replaced"""
        changes = {
            'tol': tol,
            'output_format': output_format,
            'seed': seed,
            'n_max': n_max,
            'workers': workers,
        }
        return replace(self, **{k: v for k, v in changes.items() if v is not None})
