from .gradcheck import GradCheckReport, grad_check, random_problem
from .heads import per_class_softmax, per_class_softmax_pairs
from .layers import LinearLayer, MlpNetwork, as_tensor2, forward_mlp, he_init
from .optim import SgdConfig, learning_rate, sgd_step
from .rng import make_rng
from .snapshot import network_from_dict, network_to_dict
