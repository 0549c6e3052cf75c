"""pmskill: leakage-safe multi-step forecast backtesting for daily series.

Rolling-origin evaluation with train-only preprocessing, persistence-
relative skill profiles and the predictability horizon H*, plus the model
families needed to exercise them (persistence, seasonal-naive, SARIMA,
gradient-boosted trees) and a synthetic generator with closed-form
oracles.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .errors import PmskillError
from .metrics import (
    FoldSkillSummary,
    SkillProfile,
    fold_distribution,
    h_star,
    mae,
    rmse,
    skill,
    skill_profile,
)
from .models import (
    ForecastVector,
    ForecasterSpec,
    GbtHyper,
    SarimaOrder,
    SarimaParams,
    build_supervised,
    gbt_fit,
    gbt_forecast,
    persistence_forecast,
    sarima_fit,
    sarima_forecast,
    sarima_loglik,
    sarima_order_select,
    seasonal_naive_forecast,
)
from .protocol import (
    FoldPlan,
    FoldSpec,
    ForecastRecordSet,
    PreprocSpec,
    fit_preprocessor,
    rolling_folds,
    run_protocol,
    static_plan,
    static_split,
)
from .series import (
    CsvSpec,
    FilterReport,
    QualityPolicy,
    StatsReport,
    TimeSeries,
    calendar_features,
    load_csv,
    quality_filter,
    summary_stats,
    write_csv,
)
from .synth import SynthSpec, ar1_skill_oracle, generate

__version__ = "0.1.0"
