"""
Circuit location types.

Submodules are imported explicitly (ops.gate_ops, ops.measure_ops,
ops.ideal_ops); ideal_ops depends on the code module, which itself builds
circuits from the other two.
"""
