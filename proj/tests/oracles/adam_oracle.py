"""Scalar Adam on f(w) = (w - 3)^2 from w = 0, lr 0.001, default betas."""
import math

w = m = v = 0.0
b1, b2, lr, eps = 0.9, 0.999, 1e-3, 1e-8
reached = None
for t in range(1, 10001):
    g = 2 * (w - 3)
    m = b1 * m + (1 - b1) * g
    v = b2 * v + (1 - b2) * g * g
    w -= lr * (m / (1 - b1**t)) / (math.sqrt(v / (1 - b2**t)) + eps)
    if t == 5000:
        print("w after 5000 steps:", repr(w))
    if reached is None and abs(w - 3) < 0.01:
        reached = t
print("first step with |w - 3| < 0.01:", reached)
