from .report import ComparisonReport, EvalReport, UNDEFINED, build_report, compare_reports
from .roc import RocCurve, auc_oracle, roc_auc, roc_curve
