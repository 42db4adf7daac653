"""Minimal dense-network engine: forward, exact reverse-mode gradients,
adaptive-moment updates, and portable checkpoints.

Everything runs in float64.  The networks used here are tiny, so
reproducibility is worth more than speed.
"""

import numpy as np

ACTIVATIONS = ("relu", "identity")


class DenseLayer:
    """Affine map plus elementwise activation."""

    def __init__(self, weight, bias, activation):
        if activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation: {activation!r}")
        self.weight = np.asarray(weight, dtype=np.float64)   # (out, in)
        self.bias = np.asarray(bias, dtype=np.float64)       # (out,)
        self.activation = activation
        if self.weight.ndim != 2 or self.bias.shape != (self.weight.shape[0],):
            raise ValueError("inconsistent layer shapes")

    @property
    def in_dim(self):
        return self.weight.shape[1]

    @property
    def out_dim(self):
        return self.weight.shape[0]


class Mlp:
    """Stack of dense layers with cached activations for the backward pass."""

    def __init__(self, layers):
        self.layers = list(layers)
        for a, b in zip(self.layers, self.layers[1:]):
            if a.out_dim != b.in_dim:
                raise ValueError("layer dimensions do not chain")
        self._inputs = None   # list of (n, in_dim) inputs per layer
        self._pre = None      # list of (n, out_dim) pre-activations per layer

    @property
    def in_dim(self):
        return self.layers[0].in_dim

    @property
    def out_dim(self):
        return self.layers[-1].out_dim

    def params(self):
        """Flat parameter list [W0, b0, W1, b1, ...] (live references)."""
        out = []
        for layer in self.layers:
            out.append(layer.weight)
            out.append(layer.bias)
        return out

    def forward(self, x):
        """Run the network; caches intermediates for backward().

        Accepts a single input (in_dim,) or a batch (n, in_dim) and returns
        the matching shape.
        """
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        h = x.reshape(1, -1) if single else x
        self._inputs = []
        self._pre = []
        for layer in self.layers:
            self._inputs.append(h)
            z = h @ layer.weight.T + layer.bias
            self._pre.append(z)
            h = np.maximum(z, 0.0) if layer.activation == "relu" else z
        return h[0] if single else h

    def backward(self, upstream):
        """Exact reverse-mode gradients for the last forward() call.

        ``upstream`` is dL/d(output) with the same shape forward() returned.
        Returns (param_grads, input_grad); param_grads aligns with params()
        and sums over the batch.
        """
        if self._inputs is None:
            raise RuntimeError("backward() called before forward()")
        upstream = np.asarray(upstream, dtype=np.float64)
        single = upstream.ndim == 1
        g = upstream.reshape(1, -1) if single else upstream
        grads = [None] * (2 * len(self.layers))
        for i in range(len(self.layers) - 1, -1, -1):
            layer = self.layers[i]
            dz = g * (self._pre[i] > 0.0) if layer.activation == "relu" else g
            grads[2 * i] = dz.T @ self._inputs[i]
            grads[2 * i + 1] = dz.sum(axis=0)
            g = dz @ layer.weight
        return grads, (g[0] if single else g)

    def copy(self):
        return Mlp([DenseLayer(l.weight.copy(), l.bias.copy(), l.activation)
                    for l in self.layers])


def init_mlp(dims, activations, rng):
    """Kaiming-uniform (fan-in scaled) network; biases start at zero.

    ``dims`` is [in, h1, ..., out]; ``activations`` names one activation per
    layer (len(dims) - 1 entries).
    """
    if len(activations) != len(dims) - 1:
        raise ValueError("need one activation per layer")
    layers = []
    for fan_in, fan_out, act in zip(dims, dims[1:], activations):
        gain2 = 2.0 if act == "relu" else 1.0
        bound = np.sqrt(3.0 * gain2 / fan_in)
        w = rng.uniform(-bound, bound, size=(fan_out, fan_in))
        layers.append(DenseLayer(w, np.zeros(fan_out), act))
    return Mlp(layers)


class AdamState:
    """Per-parameter first/second moments plus the shared step counter."""

    def __init__(self, params, beta1=0.9, beta2=0.999, eps=1e-8):
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]


def adam_step(params, grads, state, lr, sign=-1):
    """Bias-corrected moment update applied in place.

    sign=-1 descends (minimization), sign=+1 ascends; the moment estimates
    themselves are sign-independent.
    """
    state.step += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1 ** state.step
    c2 = 1.0 - b2 ** state.step
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p += sign * lr * (m / c1) / (np.sqrt(v / c2) + state.eps)


_MAGIC = "schedlab-mlp v1"


def save_mlp(net, path):
    """Text header (dims + activations) followed by a little-endian float64
    payload; round-trips bit-for-bit."""
    header = [_MAGIC, f"layers {len(net.layers)}"]
    for layer in net.layers:
        header.append(f"layer {layer.in_dim} {layer.out_dim} {layer.activation}")
    header.append("payload")
    payload = b"".join(np.ascontiguousarray(p, dtype="<f8").tobytes()
                       for p in net.params())
    with open(path, "wb") as fh:
        fh.write("\n".join(header).encode("ascii") + b"\n")
        fh.write(payload)


def load_mlp(path):
    with open(path, "rb") as fh:
        blob = fh.read()
    marker = b"\npayload\n"
    idx = blob.find(marker)
    if idx < 0:
        raise ValueError(f"{path}: not a checkpoint file")
    lines = blob[:idx].decode("ascii").splitlines()
    if lines[0] != _MAGIC:
        raise ValueError(f"{path}: bad checkpoint magic {lines[0]!r}")
    n_layers = int(lines[1].split()[1])
    specs = []
    for line in lines[2:2 + n_layers]:
        _, d_in, d_out, act = line.split()
        specs.append((int(d_in), int(d_out), act))
    data = np.frombuffer(blob[idx + len(marker):], dtype="<f8")
    layers = []
    offset = 0
    for d_in, d_out, act in specs:
        w = data[offset:offset + d_out * d_in].reshape(d_out, d_in).copy()
        offset += d_out * d_in
        b = data[offset:offset + d_out].copy()
        offset += d_out
        layers.append(DenseLayer(w, b, act))
    if offset != data.size:
        raise ValueError(f"{path}: payload size mismatch")
    return Mlp(layers)
