from collections import OrderedDict

import numpy as np
import torch as th
from torch.optim import Adam as ThAdam

from utils.errors import ContractError


class Adam:
    """torch Adam driven by gradients from the autodiff tape.

    Parameters live as float64 ``th.nn.Parameter``s sharing memory with numpy
    arrays. ``step`` copies each gradient into ``.grad``, lets torch update
    in place and hands back numpy copies of the new values.
    """

    def __init__(self, params, lr=1e-3, b1=0.9, b2=0.999, eps=1e-8):
        if not lr > 0:
            raise ContractError("learning rate must be positive, got {}".format(lr))
        self.lr = float(lr)
        self.b1 = float(b1)
        self.b2 = float(b2)
        self.eps = float(eps)
        self.params = OrderedDict(
            (k, th.nn.Parameter(th.from_numpy(np.array(v, dtype=np.float64, order="C"))))
            for k, v in params.items())
        self.optimiser = ThAdam(list(self.params.values()), lr=self.lr, betas=(self.b1, self.b2), eps=self.eps)

    @property
    def t(self):
        steps = [s["step"] for s in self.optimiser.state.values()]
        return int(steps[0]) if steps else 0

    def step(self, grads):
        for k, p in self.params.items():
            g = np.array(grads[k], dtype=np.float64, order="C")
            if g.shape != tuple(p.shape):
                raise ContractError("gradient for {} has shape {}, parameter has {}".format(k, g.shape, tuple(p.shape)))
            p.grad = th.from_numpy(g)
        self.optimiser.step()
        self.optimiser.zero_grad(set_to_none=True)
        return OrderedDict((k, p.detach().numpy().copy()) for k, p in self.params.items())
