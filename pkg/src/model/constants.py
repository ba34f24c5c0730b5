from types import MappingProxyType

# canonical names, as they appear on the command line and in result files
BASELINE_ACTIVATIONS = (
    "elu",
    "hard_sigmoid",
    "linear",
    "relu",
    "selu",
    "sigmoid",
    "softmax",
    "softplus",
    "softsign",
    "swish",
    "tanh",
)

PROPOSED_PAIR = ("symlog", "symexp")

# lg_model: the symlog/symexp network
PROPOSED_LABEL = "lg_model"

TRAIN_RANGE = (10.0, 100.0)
TEST_RANGE = (100.0, 1000.0)

DEFAULT_SAMPLES = 10_000
SMOKE_SAMPLES = 2_000
SMOKE_EPOCHS = 20

DEFAULT_HIDDEN_WIDTH = 8

# normalized-mode divisors for the product targets, keyed by input count
PRODUCT_NORMALIZERS = MappingProxyType({2: 10.0, 3: 100.0, 4: 1000.0})

ELU_ALPHA = 1.0
SELU_ALPHA = 1.6732632423543772
SELU_SCALE = 1.0507009873554805
HARD_SIGMOID_SLOPE = 0.2
HARD_SIGMOID_SHIFT = 0.5

# number of baseline curves kept per target in the training-loss view
TOP_CURVES = 7
