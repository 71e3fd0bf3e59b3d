import numpy as np
import pytest

from boosted_cascade.cascade import (
    CascadeModel, ModelConfig, TrainConfig, build_cascade, experiment_name, level_input, load_checkpoint, predict,
    save_checkpoint, train_cascade,
)
from boosted_cascade.cascade.checkpoint import checkpoint_from_dict, checkpoint_to_dict
from boosted_cascade.data import Dataset
from boosted_cascade.diffkernel import SgdConfig, make_rng, network_to_dict
from boosted_cascade.errors import ConfigError, DimensionError, DivergenceError, ParseError, StateError
from boosted_cascade.losses import SmoothPairwiseError, WeightedCrossEntropy
from boosted_cascade.sampling import RebalanceSpec


def _toy_dataset(n=120, d=5, c=3, seed=0):
    rng = make_rng(seed)
    x = rng.normal(size=(n, d))
    y = (x[:, :c] > 0).astype(int)
    return Dataset(x, y, tuple(f"c{i}" for i in range(c)))

def _config(**kwargs):
    defaults = dict(epochs=2, batch_size=32, seed=3, log_interval=1000)
    defaults.update(kwargs)
    return TrainConfig(**defaults)

def _snapshot(level):
    return network_to_dict(level.network)


def test_build_cascade_input_dims():
    model = build_cascade(14, 32, num_levels=6, hidden_dim=16)
    assert model.num_levels == 6
    assert model.levels[0].input_dim == 32
    assert model.levels[3].input_dim == 42
    assert all(level.num_classes == 14 for level in model.levels)
    assert not model.is_trained

def test_build_cascade_with_passthrough():
    model = build_cascade(3, 10, num_levels=3, hidden_dim=4, include_base_features=True)
    assert [level.input_dim for level in model.levels] == [10, 13, 16]

def test_build_cascade_single_level_and_errors():
    assert build_cascade(2, 4, num_levels=1).num_levels == 1
    with pytest.raises(ConfigError):
        build_cascade(1, 4, loss_family='PWE')
    with pytest.raises(ConfigError):
        build_cascade(3, 4, num_levels=0)
    assert build_cascade(1, 4, num_levels=1, loss_family='BR-CE').num_classes == 1

def test_build_cascade_linear_base_level():
    model = build_cascade(3, 5, num_levels=3, hidden_dim=8, base_hidden_dim=0)
    assert [len(level.network.layers) for level in model.levels] == [1, 2, 2]
    assert (model.levels[0].network.in_dim, model.levels[0].network.out_dim) == (5, 6)
    assert model.levels[1].network.layers[0].out_dim == 8
    narrow = build_cascade(3, 5, num_levels=2, hidden_dim=8, base_hidden_dim=3)
    assert narrow.levels[0].network.layers[0].out_dim == 3
    with pytest.raises(DimensionError):
        build_cascade(3, 5, base_hidden_dim=-1)

def test_linear_base_level_trains_and_round_trips(tmp_path):
    data = _toy_dataset()
    model = build_cascade(3, 5, num_levels=2, hidden_dim=8, base_hidden_dim=0, seed=3)
    model, _ = train_cascade(model, data, _config())
    checkpoint = load_checkpoint(save_checkpoint(str(tmp_path / 'ckpt.json'), model, data.class_names))
    assert checkpoint.model.base_hidden_dim == 0
    assert len(checkpoint.model.levels[0].network.layers) == 1
    assert np.array_equal(predict(checkpoint.model, data.features), predict(model, data.features))

def test_model_config_from_config_section():
    config = ModelConfig.from_config({'num_levels': 3, 'hidden_dim': 16.0, 'base_hidden_dim': 0,
                                      'include_base_features': True, 'dropout': 0.25})
    assert config == ModelConfig(num_levels=3, hidden_dim=16, base_hidden_dim=0,
                                 include_base_features=True, dropout=0.25)
    assert ModelConfig.from_config({}) == ModelConfig()
    model = config.build(2, 4)
    assert model.include_base_features and model.num_levels == 3
    with pytest.raises(ConfigError):
        ModelConfig(num_classes=3).build(2, 4)

@pytest.mark.parametrize('key, value', [
    ('hidden_dim', 'wide'), ('hidden_dim', 0), ('num_levels', 2.5), ('num_levels', True),
    ('include_base_features', 'no'), ('include_base_features', 1), ('dropout', 1.0), ('dropout', 'half'),
    ('base_hidden_dim', -1), ('num_classes', 0),
])
def test_model_config_rejects_bad_values(key, value):
    with pytest.raises(ConfigError):
        ModelConfig.from_config({key: value})

@pytest.mark.parametrize('key, value', [('sample_size', 10.5), ('epochs', 2.5), ('batch_size', '64'), ('seed', -1)])
def test_train_config_rejects_bad_values(key, value):
    with pytest.raises(ConfigError):
        TrainConfig.from_config({key: value})

def test_build_cascade_is_deterministic():
    a, b = build_cascade(3, 5, num_levels=2, seed=9), build_cascade(3, 5, num_levels=2, seed=9)
    for la, lb in zip(a.levels, b.levels):
        assert _snapshot(la) == _snapshot(lb)
    assert _snapshot(a.levels[0]) != _snapshot(build_cascade(3, 5, num_levels=2, seed=10).levels[0])

def test_cascade_model_rejects_inconsistent_levels():
    model = build_cascade(3, 5, num_levels=2)
    with pytest.raises(DimensionError):
        CascadeModel(model.levels, num_classes=3, base_feature_dim=6)
    with pytest.raises(DimensionError):
        CascadeModel([], num_classes=3, base_feature_dim=5)

def test_level_input_concatenation():
    model = build_cascade(3, 4, num_levels=3, hidden_dim=4)
    features = np.zeros((2, 4))
    q0 = np.array([[0.1, 0.2, 0.3], [0.4, 0.5, 0.6]])
    q1 = q0 + 0.05
    assert np.array_equal(level_input(model, 0, features, []), features)
    assert np.array_equal(level_input(model, 1, features, [q0]), q0)
    assert np.allclose(level_input(model, 2, features, [q0, q1])[0], [0.1, 0.2, 0.3, 0.15, 0.25, 0.35])

def test_level_input_with_passthrough():
    model = build_cascade(3, 10, num_levels=3, hidden_dim=4, include_base_features=True)
    features = np.arange(20.0).reshape(2, 10)
    q = np.full((2, 3), 0.5)
    inputs = level_input(model, 2, features, [q, q])
    assert inputs.shape == (2, 16)
    assert np.array_equal(inputs[:, :10], features)

def test_level_input_missing_cache():
    model = build_cascade(3, 4, num_levels=3)
    with pytest.raises(StateError):
        level_input(model, 2, np.zeros((2, 4)), [np.zeros((2, 3))])
    with pytest.raises(StateError):
        level_input(model, 1, np.zeros((2, 4)), [None])

def test_predict_untrained_rejected():
    with pytest.raises(StateError):
        predict(build_cascade(2, 3, num_levels=2), np.zeros((1, 3)))

def test_train_single_level_is_baseline():
    data = _toy_dataset()
    model, log = train_cascade(build_cascade(3, 5, num_levels=1, hidden_dim=8, seed=3), data, _config())
    assert model.is_trained
    assert len(log.levels) == 1
    assert log.levels[0].total_steps == 2 * 4
    assert len(log.levels[0].curve.rows) == 8
    assert np.isfinite(log.levels[0].train_loss)

def test_train_lifecycle_rejects_retraining():
    data = _toy_dataset()
    model, _ = train_cascade(build_cascade(3, 5, num_levels=2, hidden_dim=8), data, _config())
    assert all(level.frozen for level in model.levels)
    with pytest.raises(StateError):
        train_cascade(model, data, _config())

def test_train_rejects_mismatched_dataset():
    with pytest.raises(DimensionError):
        train_cascade(build_cascade(2, 5, num_levels=1), _toy_dataset(c=3), _config())
    with pytest.raises(DimensionError):
        train_cascade(build_cascade(3, 4, num_levels=1), _toy_dataset(d=5), _config())

def test_train_pwe_needs_two_classes():
    data = _toy_dataset(c=1)
    with pytest.raises(ConfigError):
        train_cascade(build_cascade(1, 5, num_levels=1), data, _config(loss_family='PWE'))

def test_training_is_deterministic():
    data = _toy_dataset()
    a, log_a = train_cascade(build_cascade(3, 5, num_levels=3, hidden_dim=8, seed=3), data, _config())
    b, log_b = train_cascade(build_cascade(3, 5, num_levels=3, hidden_dim=8, seed=3), data, _config())
    for la, lb in zip(a.levels, b.levels):
        assert _snapshot(la) == _snapshot(lb)
    for ea, eb in zip(log_a.levels, log_b.levels):
        assert ea.curve.to_csv_text() == eb.curve.to_csv_text()
        assert np.array_equal(ea.sample_ids, eb.sample_ids)

def test_sequential_isolation():
    data = _toy_dataset()
    one, _ = train_cascade(build_cascade(3, 5, num_levels=1, hidden_dim=8, seed=3), data, _config())
    three, _ = train_cascade(build_cascade(3, 5, num_levels=3, hidden_dim=8, seed=3), data, _config())
    # training later levels leaves level 0 as it was when frozen
    assert _snapshot(one.levels[0]) == _snapshot(three.levels[0])

def test_predict_is_mean_of_levels():
    data = _toy_dataset()
    model, _ = train_cascade(build_cascade(3, 5, num_levels=3, hidden_dim=8, seed=3), data, _config())
    mean, levels = predict(model, data.features, return_levels=True)
    assert len(levels) == 3
    assert np.allclose(mean, (levels[0] + levels[1] + levels[2]) / 3.0, atol=1e-12)
    stacked = np.stack(levels)
    assert np.all(mean >= stacked.min(axis=0) - 1e-15)
    assert np.all(mean <= stacked.max(axis=0) + 1e-15)
    assert np.all((mean >= 0) & (mean <= 1))
    assert np.array_equal(predict(model, data.features), mean)

def test_cached_predictions_match_recomputation():
    data = _toy_dataset()
    model, _ = train_cascade(build_cascade(3, 5, num_levels=2, hidden_dim=8, seed=3), data, _config())
    q0 = model.levels[0].predict(data.features)
    q1 = model.levels[1].predict(level_input(model, 1, data.features, [q0]))
    levels = model.level_predictions(data.features)
    assert np.allclose(levels[0], q0, atol=1e-12)
    assert np.allclose(levels[1], q1, atol=1e-12)

def test_ranking_follows_level_losses():
    data = _toy_dataset()
    config = _config()
    model, log = train_cascade(build_cascade(3, 5, num_levels=2, hidden_dim=8, seed=3), data, config)
    loss = WeightedCrossEntropy.for_training_labels(data.labels, data.class_names)
    recomputed = loss.evaluate(model.levels[0].logits(data.features), data.labels).per_example
    order = np.argsort(-recomputed, kind='stable')
    assert np.array_equal(log.levels[0].ranking.example_ids, order)
    assert log.levels[1].sample_ids.size == data.num_examples

def test_zero_decay_rate_smoke():
    data = _toy_dataset()
    model, log = train_cascade(build_cascade(3, 5, num_levels=3, hidden_dim=8, seed=1), data,
                               _config(decay_rates=(0.0,), rebalance=RebalanceSpec('mean')))
    assert np.allclose(log.levels[0].ranking.selection_probs, 1.0 / data.num_examples)
    q = predict(model, data.features)
    assert q.shape == (data.num_examples, 3)
    assert np.all(np.isfinite(q))

def test_pwe_cascade_trains():
    data = _toy_dataset()
    model, log = train_cascade(build_cascade(3, 5, num_levels=2, hidden_dim=8, seed=3, loss_family='PWE'),
                               data, _config(loss_family='PWE'))
    assert model.is_trained
    assert log.levels[0].curve.to_csv_text().splitlines()[0] == 'step,lr,total_loss'

def test_divergence_raises():
    data = _toy_dataset()
    config = _config(sgd=SgdConfig(learning_rate=1e200, momentum=0.0))
    with pytest.raises(DivergenceError) as e:
        train_cascade(build_cascade(3, 5, num_levels=1, hidden_dim=8), data, config)
    assert e.value.level == 0

def test_training_log_files(tmp_path):
    data = _toy_dataset()
    _, log = train_cascade(build_cascade(3, 5, num_levels=2, hidden_dim=8), data, _config())
    paths = log.write(str(tmp_path / 'logs'))
    names = sorted(p.rsplit('/', 1)[-1] for p in paths)
    assert names == ['level_0.csv', 'level_1.csv', 'ranking_0.csv', 'ranking_1.csv']
    header = (tmp_path / 'logs' / 'level_0.csv').read_text().splitlines()[0]
    assert header == 'step,lr,total_loss,ce_c0,ce_c1,ce_c2'

def test_train_config_from_config_section():
    config = TrainConfig.from_config({
        'loss_family': 'PWE', 'learning_rate': 0.05, 'decay_points': ['1/4', '3/4'], 'epochs': 3,
        'decay_rate': [1.0, 4.0], 'rebalance': {'strategy': 'max', 'targets': None}, 'seed': 5,
    })
    assert config.loss_family == 'PWE'
    assert config.sgd.learning_rate == 0.05
    assert config.decay_rate_for(1) == 1.0
    assert config.decay_rate_for(2) == 4.0
    assert config.decay_rate_for(7) == 4.0
    assert config.rebalance.strategy == 'max'
    assert TrainConfig.from_config({'decay_rate': 3.0}).decay_rate_for(4) == 3.0
    assert config.to_dict()['decay_points'] == ['1/4', '3/4']
    with pytest.raises(ConfigError):
        TrainConfig.from_config({'epochs': 0})
    with pytest.raises(ConfigError):
        TrainConfig.from_config({'decay_rate': -1.0})
    with pytest.raises(ConfigError):
        TrainConfig.from_config({'learning_rate': -1.0})

def test_experiment_names():
    assert experiment_name('BR-CE', 1) == 'BR'
    assert experiment_name('BR-CE', 6) == 'C-BR'
    assert experiment_name('PWE', 1) == 'PWE'
    assert experiment_name('PWE', 3) == 'C-PWE'

def test_checkpoint_round_trip(tmp_path):
    data = _toy_dataset()
    config = _config()
    model, _ = train_cascade(build_cascade(3, 5, num_levels=2, hidden_dim=8, seed=3), data, config)
    loss = WeightedCrossEntropy.for_training_labels(data.labels)
    path = save_checkpoint(str(tmp_path / 'ckpt.json'), model, data.class_names, config.to_dict(), loss)
    checkpoint = load_checkpoint(path)
    assert checkpoint.class_names == data.class_names
    assert checkpoint.experiment == 'C-BR'
    assert checkpoint.model.is_trained
    assert checkpoint.train_config['seed'] == 3
    assert np.array_equal(checkpoint.loss.class_weights.weights, loss.class_weights.weights)
    assert np.array_equal(predict(checkpoint.model, data.features), predict(model, data.features))

def test_checkpoint_bytes_are_deterministic(tmp_path):
    data = _toy_dataset()
    texts = []
    for run in range(2):
        model, _ = train_cascade(build_cascade(3, 5, num_levels=2, hidden_dim=8, seed=3), data, _config())
        path = save_checkpoint(str(tmp_path / f'{run}.json'), model, data.class_names, _config().to_dict())
        texts.append(open(path, 'rb').read())
    assert texts[0] == texts[1]

def test_checkpoint_rejects_malformed(tmp_path):
    with pytest.raises(ParseError):
        checkpoint_from_dict({'format': 'something-else'})
    model = build_cascade(2, 3, num_levels=2, hidden_dim=4)
    data = checkpoint_to_dict(model, ('a', 'b'), loss=SmoothPairwiseError())
    del data['model']['levels'][1]['network']
    with pytest.raises(ParseError):
        checkpoint_from_dict(data)
    data = checkpoint_to_dict(model, ('a', 'b'))
    data['model']['base_feature_dim'] = 4
    with pytest.raises(ParseError):
        checkpoint_from_dict(data)
    bad = tmp_path / 'bad.json'
    bad.write_text('{"format": ')
    with pytest.raises(ParseError):
        load_checkpoint(str(bad))
