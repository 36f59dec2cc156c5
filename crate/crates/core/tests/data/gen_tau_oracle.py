import random, mpmath
mpmath.mp.dps = 50
rng = random.Random(20240601)
rows = []
for i in range(1000):
    k = rng.choice([0.0, rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)])
    n = rng.uniform(1.5, 10.0)
    t = rng.random()
    if k > 0:
        cutoff = float(mpmath.sqrt((n - 1) / k) * mpmath.pi)
        theta = rng.uniform(0, 0.9 * cutoff)
    else:
        theta = rng.uniform(0, 5.0)
    K, N, T, TH = map(mpmath.mpf, (k, n, t, theta))
    if k == 0:
        v = T
    else:
        a = mpmath.sqrt(abs(K) / (N - 1))
        r = mpmath.sin(a*T*TH)/mpmath.sin(a*TH) if k > 0 else mpmath.sinh(a*T*TH)/mpmath.sinh(a*TH)
        v = T**(1/N) * r**(1 - 1/N)
    rows.append(f"{k!r},{n!r},{t!r},{theta!r},{mpmath.nstr(v, 25)}")
with open(__import__("os").path.join(__import__("os").path.dirname(__file__), "tau_oracle.csv"), "w") as f:
    f.write("k,n,t,theta,tau\n" + "\n".join(rows) + "\n")
