# Utils package: config loading and report writing
