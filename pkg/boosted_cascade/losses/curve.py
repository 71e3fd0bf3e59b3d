import csv
import io

from ..utils import atomic_write_text, format_real


class LossCurve:
    """Per-step training losses of one phase, written as CSV with columns
    step, lr, total_loss and, for the cross-entropy family, ce_<class>."""

    def __init__(self, class_names=None):
        self.class_names = list(class_names) if class_names is not None else None
        self.rows = []

    def record(self, step, lr, breakdown):
        per_class = None
        if self.class_names is not None and breakdown.per_class is not None:
            per_class = [float(v) for v in breakdown.per_class]
        self.rows.append((step, lr, breakdown.total, per_class))

    @property
    def last_loss(self):
        return self.rows[-1][2] if self.rows else None

    def to_csv_text(self):
        with_classes = any(r[3] is not None for r in self.rows)
        out = io.StringIO()
        writer = csv.writer(out, lineterminator='\n')
        header = ['step', 'lr', 'total_loss']
        if with_classes:
            header += [f"ce_{name}" for name in self.class_names]
        writer.writerow(header)
        for step, lr, total, per_class in self.rows:
            row = [step, format_real(lr), format_real(total)]
            if with_classes:
                row += [format_real(v) for v in per_class]
            writer.writerow(row)
        return out.getvalue()

    def write(self, path):
        return atomic_write_text(path, self.to_csv_text())
