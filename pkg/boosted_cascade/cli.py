import argparse
import dataclasses
import logging
import os
import sys

import numpy as np

from .cascade import ModelConfig, TrainConfig, load_checkpoint, predict, save_checkpoint, train_cascade
from .config import DEFAULTS, Config
from .data import CHESTXRAY14_CLASSES, class_stats, generate, load_synth_spec, read_csv, read_metadata, write_csv
from .diffkernel import grad_check, random_problem
from .diffkernel.rng import STREAM_GRADCHECK, make_rng
from .errors import CascadeError, ConfigError, DataError, DivergenceError
from .logging import setup_logging
from .losses import LOSS_FAMILIES, resolve_loss_cls
from .metrics import build_report, compare_reports
from .utils import atomic_write_text, dumps_json, format_real, parse_settings

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_DIVERGED = 3

SPECS_DIR = os.path.join(os.path.dirname(__file__), 'specs')
REPORT_FORMATS = ('csv', 'txt', 'json')


def _spec_path(name):
    """A spec file path, or the name of a bundled spec (`xor`, `chestxray14`)."""
    if os.path.exists(name):
        return name
    bundled = os.path.join(SPECS_DIR, name if name.endswith('.json') else name + '.json')
    return bundled if os.path.exists(bundled) else name


def _load_config(args):
    config = Config(args.config) if args.config else Config()
    config.update(parse_settings(args.set))
    setup_logging(args.log_level or config.log_level())
    return config


def _upload(config, paths, relative_to=None):
    storage = config.storage()
    if storage is None or not paths:
        return
    # imported lazily: libcloud is only needed when a storage section exists
    from .object_storage import ArtifactStorage
    try:
        ArtifactStorage(storage).upload_run(paths, relative_to)
    except Exception as e:
        logger.exception(f"Artifact upload failed: {e}")


def cmd_generate(args):
    spec = load_synth_spec(_spec_path(args.spec))
    if args.seed is not None:
        spec = dataclasses.replace(spec, seed=args.seed)
    train, test = generate(spec)
    write_csv(train, os.path.join(args.out_dir, 'train.csv'))
    write_csv(test, os.path.join(args.out_dir, 'test.csv'))
    logger.info(f"Wrote train.csv and test.csv to '{args.out_dir}'")
    stats = class_stats(np.vstack([train.labels, test.labels]))
    sys.stdout.write(stats.to_csv_text(train.class_names))
    return EXIT_OK


def cmd_train(args):
    config = _load_config(args)
    paths = config.paths()
    model_config = ModelConfig.from_config(config.model())
    train_config = TrainConfig.from_config(config.train())
    train = read_csv(paths['train_data'], config.evaluation()['class_names'], split='train')

    loss = config.loss_cls().for_training_labels(train.labels, train.class_names)
    model = model_config.build(train.num_classes, train.num_features, seed=train_config.seed,
                               loss_family=train_config.loss_family)
    model, log = train_cascade(model, train, train_config, loss)
    checkpoint = save_checkpoint(paths['checkpoint'], model, train.class_names, train_config.to_dict(), loss)
    written = log.write(paths['logs_dir'])

    for entry in log.levels:
        print(f"level_{entry.level}_loss={format_real(entry.train_loss)}")
    print(f"final_loss={format_real(log.levels[-1].train_loss)}")
    print(f"checkpoint={checkpoint}")
    _upload(config, [checkpoint, *written])
    return EXIT_OK


def cmd_eval(args):
    config = _load_config(args)
    paths, evaluation = config.paths(), config.evaluation()
    data_path = args.data or paths['test_data']
    out_dir = args.out or paths['reports_dir']
    formats = args.format or evaluation['formats']
    per_level = args.per_level or evaluation['per_level']
    unknown = set(formats) - set(REPORT_FORMATS)
    if unknown:
        raise ConfigError(f"Unknown report format(s) {sorted(unknown)}, expected {list(REPORT_FORMATS)}.")

    checkpoints = [load_checkpoint(path) for path in args.checkpoint or [paths['checkpoint']]]
    data = read_csv(data_path, checkpoints[0].class_names, split='test')
    reports = []
    for checkpoint in checkpoints:
        if checkpoint.class_names != data.class_names:
            raise DataError(f"Checkpoint classes {list(checkpoint.class_names)} differ from "
                            f"{list(data.class_names)} of '{data_path}'.")
        predictions, levels = predict(checkpoint.model, data.features, return_levels=True)
        reports.append(build_report(predictions, data.labels, checkpoint.class_names,
                                    level_predictions=levels if per_level else None,
                                    experiment=checkpoint.experiment or 'AUC'))

    if len(reports) == 1:
        report = reports[0]
        written = report.write(out_dir, formats)
    else:
        report = compare_reports(reports)
        written = report.write(out_dir, formats)
        if per_level:
            written += [atomic_write_text(os.path.join(out_dir, f"levels_{title}.csv"), r.levels_csv_text())
                        for title, r in zip(report.experiments, reports)]
    logger.info(f"Wrote {len(written)} report files to '{out_dir}'")
    sys.stdout.write(report.to_csv_text())
    _upload(config, written)
    return EXIT_OK


def _corrupt_gradient(network):
    network.layers[-1].bias_grad[0] += 1.0


def cmd_gradcheck(args):
    setup_logging(args.log_level or 'INFO')
    if args.draws < 1:
        raise ConfigError(f"--draws must be at least 1, got {args.draws}.")
    hook = _corrupt_gradient if args.corrupt_gradient else None
    worst = None
    for f, family in enumerate(LOSS_FAMILIES):
        loss_cls = resolve_loss_cls(family)
        for draw in range(args.draws):
            network, inputs, labels = random_problem(make_rng(args.seed, STREAM_GRADCHECK, f, draw))
            loss = loss_cls.for_training_labels(labels)
            report = grad_check(network, loss, inputs, labels, args.epsilon, args.tolerance, gradient_hook=hook)
            status = 'PASS' if report.passed else 'FAIL'
            print(f"{family} draw={draw} params={report.num_checked} "
                  f"max_rel_error={report.max_relative_error:.3e} worst={report.describe_worst()} {status}")
            if worst is None or report.max_relative_error > worst[2].max_relative_error:
                worst = (family, draw, report)
    family, draw, report = worst
    print(f"result={'PASS' if report.passed else 'FAIL'} max_rel_error={report.max_relative_error:.3e} "
          f"worst={family}:{draw}:{report.describe_worst()} analytic={report.analytic!r} numeric={report.numeric!r}")
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def cmd_init_config(args):
    text = dumps_json(DEFAULTS)
    if args.out:
        atomic_write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_stats(args):
    class_names = None if args.discover_classes else CHESTXRAY14_CLASSES
    metadata = read_metadata(args.metadata, class_names)
    sys.stdout.write(class_stats(metadata.labels).to_csv_text(metadata.class_names))
    return EXIT_OK


def build_parser():
    formatter = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(
        prog='boosted_cascade',
        description='Boosted cascade of multi-label classifiers: data, training, evaluation.',
        formatter_class=formatter,
    )
    parser.add_argument('--log-level', default=None,
                        help='Logging level (DEBUG, INFO, WARNING, ...); defaults to the config log_level or INFO.')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('generate', help='Generate a synthetic dataset from a spec.', formatter_class=formatter)
    p.add_argument('spec', help='SynthSpec JSON file, or a bundled spec name (xor, chestxray14).')
    p.add_argument('--out-dir', default='data', help='Directory receiving train.csv and test.csv.')
    p.add_argument('--seed', type=int, default=None, help='Override the seed in the spec.')
    p.set_defaults(func=cmd_generate)

    def add_config_args(p):
        p.add_argument('--config', default=None, help='Experiment config JSON; built-in defaults when omitted.')
        p.add_argument('--set', action='append', default=[], metavar='KEY=VALUE',
                       help='Override a config leaf, e.g. train.seed=7 (repeatable).')

    p = sub.add_parser('train', help='Train a cascade and write a checkpoint and training logs.',
                       formatter_class=formatter)
    add_config_args(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser('eval', help='Write per-class AUC reports of a checkpoint on a dataset.',
                       formatter_class=formatter)
    add_config_args(p)
    p.add_argument('--checkpoint', action='append', default=None,
                   help='Checkpoint JSON; defaults to paths.checkpoint. Repeat to compare models column by column.')
    p.add_argument('--data', default=None, help='Dataset CSV; defaults to paths.test_data.')
    p.add_argument('--out', default=None, help='Report directory; defaults to paths.reports_dir.')
    p.add_argument('--format', action='append', choices=REPORT_FORMATS, default=None,
                   help='Report format (repeatable); defaults to eval.formats.')
    p.add_argument('--per-level', action='store_true', help='Also write the per-level AUC breakdown.')
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser('gradcheck', help='Verify analytic gradients of both loss families.',
                       formatter_class=formatter)
    p.add_argument('--seed', type=int, default=0, help='Seed of the random architectures and data.')
    p.add_argument('--draws', type=int, default=20, help='Random problems per loss family.')
    p.add_argument('--epsilon', type=float, default=1e-5, help='Finite-difference step.')
    p.add_argument('--tolerance', type=float, default=1e-4, help='Maximum relative error to pass.')
    p.add_argument('--corrupt-gradient', action='store_true',
                   help='Corrupt one analytic gradient before comparing; the check must fail.')
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser('init-config', help='Print the default experiment config.', formatter_class=formatter)
    p.add_argument('--out', default=None, help='Write to this file instead of standard output.')
    p.set_defaults(func=cmd_init_config)

    p = sub.add_parser('stats', help='Class totals and co-occurrence of a ChestX-ray14 metadata CSV.',
                       formatter_class=formatter)
    p.add_argument('--metadata', required=True, help='CSV with Image Index and Finding Labels columns.')
    p.add_argument('--discover-classes', action='store_true',
                   help='Use the findings present in the file instead of the 14 disease names.')
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command in ('generate', 'init-config', 'stats'):
            setup_logging(args.log_level or 'INFO')
        return args.func(args)
    except DivergenceError as e:
        logger.error(f"Training diverged: {e}")
        return EXIT_DIVERGED
    except (CascadeError, ValueError, FileNotFoundError) as e:
        logger.error(str(e))
        return EXIT_USAGE


def run():
    sys.exit(main())
