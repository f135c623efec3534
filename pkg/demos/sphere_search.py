"""Watch the fish swarm minimize the 2-D sphere function.

Twenty fish start uniformly inside [-5, 5]^2 and cooperate through the
prey/swarm/follow behaviors; the bulletin board records the best point any
fish ever occupied. Identical seeds reproduce identical runs.
"""

from shoal import afsa

params = afsa.SwarmParams(
    visual=2.5,
    step=0.3,
    try_number=5,
    delta=0.618,
    population_size=20,
    max_iterations=200,
    bounds=((-5.0, 5.0), (-5.0, 5.0)),
)
objective = afsa.sphere(2)

state = afsa.init_swarm(params, objective, seed=1)
print(f"initial best: {state.bulletin_fitness:.6f}")

state, history = afsa.run(state, params, objective, params.max_iterations)

for iteration in (1, 5, 10, 25, 50, 100, 200):
    print(f"after {iteration:>3} iterations: best fitness {history[iteration - 1]:.3e}")

x, y = state.bulletin_position
print(f"\nbest point found: ({x:.5f}, {y:.5f})")
print(f"history is non-increasing: {all(b <= a for a, b in zip(history, history[1:]))}")
