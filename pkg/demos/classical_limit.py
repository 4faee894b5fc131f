"""
Approaching q = 1
=================

The q-Gamma function, the Poisson kernel and the q-Macdonald function
against their classical counterparts as q tends to 1.
"""

from qlob.checks import limit_table

print(f"{'q':>6} {'qgamma':>10} {'pkernel':>10} {'k2 shape':>10}")
for row in limit_table(0.5, (0.9, 0.95, 0.99, 0.995, 0.999)):
    print(f"{row['q']:6} {row['qgamma']:10.2e} {row['pkernel']:10.2e} {row['k2_shape']:10.2e}")
