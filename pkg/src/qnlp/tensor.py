"""Small dense tensor-network contraction used by the semantics oracles."""

from __future__ import annotations

import string
from collections import Counter

import numpy as np

_LETTERS = string.ascii_letters


def contract_network(tensors, output):
    """
    Contract ``tensors`` (a list of ``(array, labels)``) over shared labels.

    Every label must occur in at most two tensors; labels in ``output``
    stay open, in that order.  Pairs are contracted greedily, smallest
    intermediate first.
    """
    output = list(output)
    work = [(np.asarray(arr), list(labels)) for arr, labels in tensors]
    if not work:
        return np.ones(())
    while len(work) > 1:
        best = None
        for i in range(len(work)):
            for j in range(i + 1, len(work)):
                shared = set(work[i][1]) & set(work[j][1])
                size = _result_size(work[i], work[j], shared)
                key = (not shared, size)
                if best is None or key < best[0]:
                    best = (key, i, j)
        _, i, j = best
        merged = _pair(work[i], work[j])
        work = [t for k, t in enumerate(work) if k not in (i, j)] + [merged]
    arr, labels = work[0]
    if Counter(labels) != Counter(output):
        raise ValueError(f"open labels {labels} do not match output {output}")
    return np.transpose(arr, [labels.index(x) for x in output]) if labels else arr


def _result_size(a, b, shared):
    size = 1
    for arr, labels in (a, b):
        for dim, label in zip(arr.shape, labels):
            if label not in shared:
                size *= dim
    return size


def _pair(a, b):
    (arr_a, lab_a), (arr_b, lab_b) = a, b
    names = {}
    for label in lab_a + lab_b:
        if label not in names:
            names[label] = _LETTERS[len(names)]
    shared = set(lab_a) & set(lab_b)
    keep = [x for x in lab_a if x not in shared] + [x for x in lab_b if x not in shared]
    if len(names) > len(_LETTERS):
        raise ValueError("too many distinct labels in one contraction step")
    spec = "{},{}->{}".format(
        "".join(names[x] for x in lab_a),
        "".join(names[x] for x in lab_b),
        "".join(names[x] for x in keep))
    return np.einsum(spec, arr_a, arr_b), keep
