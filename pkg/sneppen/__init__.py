"""五物种 Bak–Sneppen 模型

- exact_coeffs: 精确有理系数表 α_{i,j,k} 与极限 β_{i,j}
- hypergeom: F_{n,m}、G、G₂、𝒢
- ode5: ℬ₁ 的五阶常微分方程
- steady_density: 稳态联合密度、边缘密度与分布函数
- simulator: 蒙特卡洛模拟与 KS 检验
- validation: 验证报告
- figures: 曲线数据
"""

__version__ = "0.1.0"
