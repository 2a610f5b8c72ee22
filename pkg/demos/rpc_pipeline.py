"""Walk the RPC server net: unbounded alone, bounded under its control DFA."""
from tracebound import core
from tracebound.boundedness import decide_boundedness
from tracebound.fixtures import fig1, fig1_control

net = fig1(2)
v = decide_boundedness(net)
f = v.fork
print("alone:", type(v).__name__)
print("  pivot   ", net.format_config(f.s))
print("  stem    ", f.stem)
print("  branches", f.a_branch, "|", " ".join(f.b_branch))

prod = core.ProductSystem(net, fig1_control(2))
v = decide_boundedness(prod)
print("with control:", type(v).__name__)
print("  expression", v.expr)
print("  inclusion ", v.transcript)
