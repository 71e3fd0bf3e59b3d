import numpy as np

from ..errors import DimensionError, ParseError
from .layers import LinearLayer, MlpNetwork


def network_to_dict(network):
    """Parameter snapshot: layer dims with row-major weights and biases."""
    return {
        'dropout': network.dropout_p,
        'layers': [
            {
                'in_dim': layer.in_dim,
                'out_dim': layer.out_dim,
                'weight': [float(v) for v in layer.weight.reshape(-1)],
                'bias': [float(v) for v in layer.bias],
            }
            for layer in network.layers
        ],
    }


def network_from_dict(data):
    try:
        layers = []
        for entry in data['layers']:
            layer = LinearLayer(int(entry['in_dim']), int(entry['out_dim']))
            weight = np.asarray(entry['weight'], dtype=np.float64)
            bias = np.asarray(entry['bias'], dtype=np.float64)
            if weight.size != layer.weight.size or bias.size != layer.bias.size:
                raise DimensionError(f"Snapshot layer {len(layers)} arrays do not match its dims.")
            layer.weight[...] = weight.reshape(layer.weight.shape)
            layer.bias[...] = bias
            layers.append(layer)
        return MlpNetwork(layers, float(data.get('dropout', 0.0)))
    except (KeyError, TypeError) as e:
        raise ParseError(f"Malformed network snapshot: {e}")
