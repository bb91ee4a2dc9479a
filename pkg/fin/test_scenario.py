"""
Tests for scenario loading, validation and resource queries
"""
import json
import math

import pytest

from fin.errors import ScenarioParseError, ScenarioValidationError, UnitError
from fin.models import Tier, TrafficMode
from fin.scenario import (
    dump_scenario, effective_bandwidth, effective_compute, load_scenario,
    scenario_from_dict, survival_fraction, traversal_fraction, validate_scenario
)


@pytest.fixture
def alexnet():
    """Bundled B-AlexNet/CIFAR10 scenario"""
    return load_scenario('b_alexnet_cifar10.json')


@pytest.fixture
def multiapp():
    """Bundled six-application scenario"""
    return load_scenario('multiapp_paper.json')


def test_load_bundled_scenario(alexnet):
    """Test a bundled model file extends the default tiers"""
    assert [n.id for n in alexnet.nodes] == ['sensor', 'mobile', 'edge', 'cloud']
    app = alexnet.application('h2')
    assert len(app.blocks) == 5
    assert [e.index for e in app.exits] == [1, 2, 3]
    assert app.target_latency == pytest.approx(5e-3)
    assert app.target_accuracy == pytest.approx(0.55)
    assert app.exits[-1].accuracy == pytest.approx(0.8595)
    assert alexnet.node('mobile').compute_capacity == pytest.approx(1.1e13)


def test_final_exit_fraction_is_remainder(alexnet):
    """Test the final exit captures the remaining samples"""
    app = alexnet.application('h2')
    assert sum(e.fraction for e in app.exits) == pytest.approx(1.0, abs=1e-12)
    assert app.exits[-1].fraction == pytest.approx(0.092)


def test_application_base_composition(multiapp):
    """Test six applications inherit their models and take overrides"""
    ids = [app.id for app in multiapp.applications]
    assert ids == ['h1', 'h2', 'h3', 'h4', 'h5', 'h6']
    assert multiapp.application('h5').target_latency == pytest.approx(1e-4)
    assert multiapp.application('h5').target_accuracy == pytest.approx(0.93)
    assert multiapp.application('h3').model_name.startswith('B-ResNet')


def test_validate_scenario_accepts_bundled(alexnet):
    """Test validation helper on a valid scenario"""
    is_valid, error = validate_scenario(alexnet)
    assert is_valid is True
    assert error is None


def test_missing_file_is_parse_error(tmp_path):
    """Test a missing file raises a parse error"""
    with pytest.raises(ScenarioParseError) as exc:
        load_scenario(tmp_path / 'absent.json')
    assert exc.value.exit_code == 2


def test_truncated_file_is_parse_error(tmp_path):
    """Test a truncated JSON document raises a parse error"""
    path = tmp_path / 'broken.json'
    path.write_text('{"nodes": [', encoding='utf-8')
    with pytest.raises(ScenarioParseError):
        load_scenario(path)


def test_circular_extends(tmp_path):
    """Test an extends cycle is reported"""
    (tmp_path / 'a.json').write_text(json.dumps({'extends': 'b.json'}), encoding='utf-8')
    (tmp_path / 'b.json').write_text(json.dumps({'extends': 'a.json'}), encoding='utf-8')
    with pytest.raises(ScenarioParseError):
        load_scenario(tmp_path / 'a.json')


def test_over_allocated_slices(tiny_raw):
    """Test compute slices above 100 % are rejected"""
    tiny_raw['applications'].append(dict(tiny_raw['applications'][0], id='b'))
    tiny_raw['slices'] = [
        {'application': 'a', 'node': 'e', 'compute_fraction': '60 %'},
        {'application': 'b', 'node': 'e', 'compute_fraction': '50 %'}
    ]
    with pytest.raises(ScenarioValidationError) as exc:
        scenario_from_dict(tiny_raw)
    assert exc.value.offending_id == 'e'
    assert exc.value.exit_code == 3


def test_duplicate_node_id(tiny_raw):
    """Test duplicate node ids are rejected"""
    tiny_raw['nodes'].append(dict(tiny_raw['nodes'][1]))
    with pytest.raises(ScenarioValidationError) as exc:
        scenario_from_dict(tiny_raw)
    assert exc.value.offending_id == 'm'


def test_link_to_unknown_node(tiny_raw):
    """Test link endpoints must be declared"""
    tiny_raw['links'].append({'from': 'm', 'to': 'ghost'})
    with pytest.raises(ScenarioValidationError) as exc:
        scenario_from_dict(tiny_raw)
    assert exc.value.offending_id == 'ghost'


def test_source_with_compute_rejected(tiny_raw):
    """Test a data-source node cannot declare compute"""
    tiny_raw['nodes'][0]['compute_capacity'] = '1 GOPS'
    with pytest.raises(ScenarioValidationError):
        scenario_from_dict(tiny_raw)


def test_final_block_needs_exit(tiny_raw):
    """Test the last block must carry an exit"""
    del tiny_raw['applications'][0]['model']['blocks'][1]['exit']
    with pytest.raises(ScenarioValidationError):
        scenario_from_dict(tiny_raw)


def test_exit_fractions_must_sum_to_one(tiny_raw):
    """Test a final fraction far from the remainder is rejected"""
    tiny_raw['applications'][0]['model']['blocks'][1]['exit']['fraction'] = '30 %'
    with pytest.raises(ScenarioValidationError):
        scenario_from_dict(tiny_raw)


def test_exit_indices_must_increase(tiny_raw):
    """Test exit indices strictly increase along the blocks"""
    tiny_raw['applications'][0]['model']['blocks'][1]['exit']['index'] = 1
    with pytest.raises(ScenarioValidationError):
        scenario_from_dict(tiny_raw)


def test_unknown_unit_suffix(tiny_raw):
    """Test an unknown suffix raises a unit error"""
    tiny_raw['nodes'][1]['compute_power'] = '6 horsepower'
    with pytest.raises(UnitError):
        scenario_from_dict(tiny_raw)


def test_effective_bandwidth(alexnet):
    """Test bandwidth is the bottleneck of interfaces and link"""
    assert math.isinf(effective_bandwidth(alexnet, 'h2', 'mobile', 'mobile'))
    assert effective_bandwidth(alexnet, 'h2', 'mobile', 'edge') == pytest.approx(1e8)
    assert effective_bandwidth(alexnet, 'h2', 'edge', 'cloud') == pytest.approx(5.6e11)
    assert math.isinf(effective_bandwidth(alexnet, 'h2', 'sensor', 'mobile'))
    assert effective_bandwidth(alexnet, 'h2', 'sensor', 'edge') == 0.0


def test_effective_bandwidth_unknown_node(alexnet):
    """Test queries on undeclared nodes are validation errors"""
    with pytest.raises(ScenarioValidationError):
        effective_bandwidth(alexnet, 'h2', 'mobile', 'ghost')


def test_slices_scale_resources(multiapp):
    """Test per-application slices scale compute and bandwidth"""
    assert effective_compute(multiapp, 'h1', 'edge') == pytest.approx(153.4e12 * 0.005)
    assert effective_compute(multiapp, 'h1', 'sensor') == 0.0
    assert effective_bandwidth(multiapp, 'h1', 'mobile', 'edge') == pytest.approx(1e8 * 0.166)


def test_survival_fraction(alexnet):
    """Test survival is non-increasing and ends at zero"""
    app = alexnet.application('h2')
    values = [survival_fraction(app, i) for i in range(1, 6)]
    assert values == pytest.approx([0.344, 0.344, 0.092, 0.092, 0.0])
    assert all(a >= b for a, b in zip(values, values[1:]))

    with pytest.raises(ValueError):
        survival_fraction(app, 0)
    with pytest.raises(ValueError):
        survival_fraction(app, 6)


# (file, application id, blocks, exit accuracies, exit fractions)
BUNDLED_MODELS = [
    ('b_alexnet_cifar10.json', 'h2', 5, [0.5637, 0.7804, 0.8595], [0.656, 0.252, 0.092]),
    ('b_alexnet_cifar100.json', 'h1', 5, [0.3956, 0.5422, 0.6032], [0.656, 0.252, 0.092]),
    ('b_resnet_cifar10.json', 'h4', 5, [0.3897, 0.5193, 0.9391], [0.415, 0.138, 0.447]),
    ('b_resnet_cifar100.json', 'h3', 5, [0.2997, 0.3993, 0.7221], [0.415, 0.138, 0.447]),
    ('b_lenet_mnist.json', 'h5', 3, [0.9118, 0.9670], [0.943, 0.057]),
    ('b_lenet_emnist.json', 'h6', 3, [0.9354, 0.9920], [0.943, 0.057]),
]


@pytest.mark.parametrize('name, app_id, block_count, accuracies, fractions', BUNDLED_MODELS)
def test_bundled_model_tables(name, app_id, block_count, accuracies, fractions):
    """Test each bundled model file carries its block, exit and accuracy table"""
    app = load_scenario(name).application(app_id)
    assert len(app.blocks) == block_count
    assert len(app.exits) == len(accuracies)
    assert [e.accuracy for e in app.exits] == pytest.approx(accuracies)
    assert [e.fraction for e in app.exits] == pytest.approx(fractions, abs=1e-3)
    assert sum(e.fraction for e in app.exits) == pytest.approx(1.0, abs=1e-12)
    exit_accuracies = [e.accuracy for e in app.exits]
    assert exit_accuracies == sorted(set(exit_accuracies))
    assert app.blocks[-1].exit is not None


def test_lenet_survival_after_first_exit():
    """Test 5.7 % of LeNet samples continue past the first exit"""
    app = load_scenario('b_lenet_mnist.json').application('h5')
    assert survival_fraction(app, 1) == pytest.approx(0.057)
    assert survival_fraction(app, 2) == pytest.approx(0.057)
    assert survival_fraction(app, 3) == 0.0


def test_traversal_fraction_modes(alexnet):
    """Test both traversal-fraction readings"""
    app = alexnet.application('h2')
    assert traversal_fraction(app, 0, TrafficMode.survival) == 1.0
    assert traversal_fraction(app, 0, TrafficMode.literal) == 1.0
    assert traversal_fraction(app, 1, 'survival') == pytest.approx(0.344)
    assert traversal_fraction(app, 1, 'literal') == pytest.approx(0.656)
    assert traversal_fraction(app, 2, 'literal') == 1.0


def test_dump_and_reload(alexnet, tmp_path):
    """Test a dumped scenario reloads field-by-field equal"""
    path = tmp_path / 'dumped.json'
    dump_scenario(alexnet, path)
    reloaded = load_scenario(path)
    assert reloaded == alexnet
    assert reloaded.node('sensor').tier == Tier.source
